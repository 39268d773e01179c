#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wattbench/catalog.hpp"
#include "wattbench/detail/json_util.hpp"
#include "wattbench/error.hpp"
#include "wattbench/format.hpp"
#include "wattbench/quantities.hpp"
#include "wattbench/tokens.hpp"

namespace wattbench {

enum class Rounding { exact, paper };

inline Rounding parse_rounding(std::string_view s) {
  if (s == "exact") return Rounding::exact;
  if (s == "paper") return Rounding::paper;
  throw InvalidValue("unknown rounding mode '" + std::string(s) + "' (expected exact or paper)");
}

inline const char* to_string(Rounding r) { return r == Rounding::paper ? "paper" : "exact"; }

struct PipelineStage {
  std::string label;
  std::string model;
  TokenCount tokens_per_call;
  std::uint64_t calls_per_action = 1;
  double energy_per_token_wh = 0.0;
};

struct PipelineSpec {
  std::string agent;
  std::vector<PipelineStage> stages;
};

struct PowerModel {
  PowerW server_power;
  std::uint64_t gpus_per_server = 1;
  double overhead_fraction = 0.0;
  double utilization_fraction = 1.0;
};

struct FlopEnergyModel {
  ModelSpec model;
  double gpu_throughput = 0.0;  // dense FLOP/s
  PowerModel power_model;
  double flop_multiplier = 2.0;
  Rounding rounding = Rounding::exact;
};

struct EstimateResult {
  std::string agent;
  EnergyWh energy_per_action;
  EnergyWh energy_total;
  std::vector<std::string> assumptions;
};

inline void validate(const PipelineStage& s) {
  if (s.tokens_per_call.value() == 0) throw InvalidValue("stage '" + s.label + "': tokens_per_call must be > 0");
  if (s.calls_per_action < 1) throw InvalidValue("stage '" + s.label + "': calls_per_action must be >= 1");
  if (!(s.energy_per_token_wh > 0) || !std::isfinite(s.energy_per_token_wh)) {
    throw InvalidValue("stage '" + s.label + "': energy_per_token must be > 0");
  }
}

inline void validate(const PipelineSpec& p) {
  if (p.stages.empty()) throw InvalidValue("pipeline '" + p.agent + "' has no stages");
  for (const auto& s : p.stages) validate(s);
}

inline void validate(const PowerModel& p) {
  if (p.gpus_per_server < 1) throw InvalidValue("gpus_per_server must be >= 1");
  if (!(p.overhead_fraction >= 0 && p.overhead_fraction <= 1)) throw InvalidValue("overhead_fraction must be in [0, 1]");
  if (!(p.utilization_fraction > 0 && p.utilization_fraction <= 1)) {
    throw InvalidValue("utilization_fraction must be in (0, 1]");
  }
}

inline void validate(const FlopEnergyModel& m) {
  if (!(m.gpu_throughput > 0) || !std::isfinite(m.gpu_throughput)) throw InvalidValue("gpu_throughput must be > 0");
  if (!(m.flop_multiplier > 0) || !std::isfinite(m.flop_multiplier)) throw InvalidValue("flop_multiplier must be > 0");
  validate(m.power_model);
}

/// flop_multiplier x active parameters.
inline double flops_per_token(const FlopEnergyModel& m) {
  return m.flop_multiplier * static_cast<double>(active_params(m.model));
}

inline DurationS token_compute_time(double flops, double throughput) {
  if (!(throughput > 0) || !std::isfinite(throughput)) {
    throw InvalidValue("throughput must be positive, got " + std::to_string(throughput));
  }
  return DurationS(flops / throughput);
}

/// Rounds to one significant figure (1071 -> 1000, 1500 -> 2000).
inline double round_1sf(double x) {
  if (x == 0.0) return 0.0;
  const double q = std::pow(10.0, std::floor(std::log10(std::abs(x))));
  return std::round(x / q) * q;
}

/// Per-GPU share of the server rating with overhead and utilization applied.
/// Paper mode rounds the result to one significant figure.
inline PowerW effective_gpu_power(const PowerModel& p, Rounding rounding) {
  validate(p);
  const double w = p.server_power.value() / static_cast<double>(p.gpus_per_server) * (1.0 + p.overhead_fraction) *
                   p.utilization_fraction;
  return PowerW(rounding == Rounding::paper ? round_1sf(w) : w);
}

/// Wh per token.
inline double flop_energy_per_token(const FlopEnergyModel& m) {
  validate(m);
  const auto t = token_compute_time(flops_per_token(m), m.gpu_throughput);
  return (effective_gpu_power(m.power_model, m.rounding) * t).value();
}

/// Sum over stages of tokens x calls x energy per token.
inline EnergyWh action_energy(const PipelineSpec& p) {
  validate(p);
  double wh = 0.0;
  for (const auto& s : p.stages) {
    wh += static_cast<double>(s.tokens_per_call.value()) * static_cast<double>(s.calls_per_action) *
          s.energy_per_token_wh;
  }
  return EnergyWh(wh);
}

inline EnergyWh benchmark_energy(EnergyWh per_action, const BenchmarkSpec& b) {
  return per_action * (b.avg_actions_per_task * static_cast<double>(b.task_count));
}

struct FlopScenario {
  FlopEnergyModel model;
  std::string gpu;
  TokenCount tokens_per_action;
};

struct Scenario {
  std::string agent;
  BenchmarkSpec benchmark;
  Rounding rounding = Rounding::exact;
  std::variant<PipelineSpec, FlopScenario> mode;
  std::vector<std::string> inputs;  // provenance of ingested values
};

inline std::string display_action_wh(EnergyWh e) { return fmt::fixed(e.value(), 2); }
inline std::string display_total_kwh(EnergyWh e) { return fmt::fixed(e.in(EnergyUnit::kWh), 1); }

inline EstimateResult estimate(const Scenario& sc) {
  EstimateResult r;
  r.agent = sc.agent;
  r.assumptions = sc.inputs;
  r.assumptions.push_back(std::string("rounding mode: ") + to_string(sc.rounding));
  if (const auto* p = std::get_if<PipelineSpec>(&sc.mode)) {
    for (const auto& s : p->stages) {
      const double wh = static_cast<double>(s.tokens_per_call.value()) * static_cast<double>(s.calls_per_action) *
                        s.energy_per_token_wh;
      r.assumptions.push_back("stage '" + s.label + "' (" + s.model + "): " + std::to_string(s.tokens_per_call.value()) +
                              " tokens x " + std::to_string(s.calls_per_action) + " calls x " +
                              fmt::sci(s.energy_per_token_wh, 3) + " Wh/token = " + fmt::sig(wh, 4) + " Wh");
    }
    r.energy_per_action = action_energy(*p);
  } else {
    auto f = std::get<FlopScenario>(sc.mode);
    f.model.rounding = sc.rounding;
    const auto& pm = f.model.power_model;
    const double flops = flops_per_token(f.model);
    const auto t = token_compute_time(flops, f.model.gpu_throughput);
    const auto power = effective_gpu_power(pm, sc.rounding);
    const double e_tok = flop_energy_per_token(f.model);
    r.assumptions.push_back("model " + f.model.model.name + ": " + fmt::sci(static_cast<double>(active_params(f.model.model)), 3) +
                            " active parameters x " + fmt::compact(f.model.flop_multiplier) + " = " + fmt::sci(flops, 3) +
                            " FLOP/token");
    r.assumptions.push_back("GPU " + f.gpu + ": " + fmt::sci(f.model.gpu_throughput, 3) + " FLOP/s dense -> " +
                            fmt::sci(t.value(), 3) + " s/token");
    r.assumptions.push_back("power: " + fmt::compact(pm.server_power.value()) + " W / " + std::to_string(pm.gpus_per_server) +
                            " GPUs x (1 + " + fmt::compact(pm.overhead_fraction) + ") x " +
                            fmt::compact(pm.utilization_fraction) + " = " +
                            fmt::compact(effective_gpu_power(pm, Rounding::exact).value(), 1) + " W per GPU" +
                            (sc.rounding == Rounding::paper ? ", rounded to " + fmt::compact(power.value(), 1) + " W" : ""));
    r.assumptions.push_back("energy per token: " + fmt::sci(e_tok, 3) + " Wh");
    r.assumptions.push_back("tokens per action: " + std::to_string(f.tokens_per_action.value()));
    r.energy_per_action = EnergyWh(e_tok * static_cast<double>(f.tokens_per_action.value()));
  }
  r.energy_total = benchmark_energy(r.energy_per_action, sc.benchmark);
  r.assumptions.push_back("benchmark " + sc.benchmark.name + ": " + std::to_string(sc.benchmark.task_count) + " tasks x " +
                          fmt::compact(sc.benchmark.avg_actions_per_task) + " actions per task");
  return r;
}

namespace detail {

/// A number, {"token_counts": path} (mean tokens per document, rounded), or
/// "max_input_tokens" of `model`.
inline TokenCount parse_token_source(const json_util::json& v, const std::string& field,
                                     const std::filesystem::path& base_dir, const ModelSpec* model,
                                     std::vector<std::string>& inputs) {
  if (v.is_string()) {
    if (v.get<std::string>() != "max_input_tokens") throw SchemaError(field, "expected \"max_input_tokens\"");
    if (!model || !model->max_input_tokens) throw SchemaError(field, "model has no max_input_tokens");
    inputs.push_back(field + ": " + model->name + " input limit " + std::to_string(model->max_input_tokens->value()) +
                     " tokens");
    return *model->max_input_tokens;
  }
  if (v.is_object()) {
    json_util::only_keys(v, field, {"token_counts"});
    const auto rel = json_util::string_field(v, field, "token_counts");
    const auto path = base_dir / rel;
    const auto counts = load_token_counts(path);
    const auto mean = static_cast<std::uint64_t>(std::llround(mean_tokens(counts)));
    inputs.push_back(field + ": mean of " + std::to_string(counts.documents.size()) + " document(s) = " +
                     std::to_string(mean) + " tokens (" + counts.tokenizer_id + ", " + rel + ")");
    return TokenCount(mean);
  }
  const auto n = json_util::integer_value(v, field);
  if (n <= 0) throw SchemaError(field, "expected positive integer");
  return TokenCount(static_cast<std::uint64_t>(n));
}

}  // namespace detail

/// Scenario JSON; token_counts paths resolve against `base_dir`.
inline Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir, const Catalog& catalog,
                               const std::string& source = "<scenario>") {
  using json_util::json;
  const auto root = json_util::parse(text, source);
  json_util::require_object(root, "");
  json_util::only_keys(root, "", {"agent", "mode", "stages", "flop", "tokens_per_action", "benchmark", "rounding"});
  Scenario sc;
  sc.agent = json_util::string_field(root, "", "agent");
  sc.benchmark = catalog.benchmark(json_util::string_field(root, "", "benchmark"));
  if (root.contains("rounding")) sc.rounding = parse_rounding(json_util::string_field(root, "", "rounding"));
  const auto mode = json_util::string_field(root, "", "mode");

  if (mode == "pipeline") {
    if (root.contains("flop") || root.contains("tokens_per_action")) {
      throw SchemaError("mode", "pipeline scenarios take only stages");
    }
    PipelineSpec p{sc.agent, {}};
    const auto& stages = json_util::member(root, "", "stages");
    json_util::require_array(stages, "stages");
    if (stages.empty()) throw SchemaError("stages", "at least one stage required");
    for (std::size_t i = 0; i < stages.size(); ++i) {
      const auto f = json_util::index("stages", i);
      const auto& s = stages[i];
      json_util::require_object(s, f);
      json_util::only_keys(s, f, {"label", "model", "tokens_per_call", "calls_per_action", "energy_per_token_wh"});
      PipelineStage st;
      st.label = json_util::string_field(s, f, "label");
      st.model = json_util::string_field(s, f, "model");
      const auto& model = catalog.model(st.model);
      st.tokens_per_call = detail::parse_token_source(json_util::member(s, f, "tokens_per_call"),
                                                      json_util::join(f, "tokens_per_call"), base_dir, &model, sc.inputs);
      const auto calls = s.contains("calls_per_action") ? json_util::integer_field(s, f, "calls_per_action") : 1;
      if (calls < 1) throw SchemaError(json_util::join(f, "calls_per_action"), "expected integer >= 1");
      st.calls_per_action = static_cast<std::uint64_t>(calls);
      st.energy_per_token_wh = json_util::positive_field(s, f, "energy_per_token_wh");
      p.stages.push_back(std::move(st));
    }
    sc.inputs.push_back("candidate tokens are the full page token count, an upper bound");
    sc.mode = std::move(p);
  } else if (mode == "flop") {
    if (root.contains("stages")) throw SchemaError("mode", "flop scenarios take no stages");
    const auto& fj = json_util::member(root, "", "flop");
    json_util::require_object(fj, "flop");
    json_util::only_keys(fj, "flop", {"model", "gpu", "flop_multiplier", "power_model"});
    FlopScenario f;
    f.model.model = catalog.model(json_util::string_field(fj, "flop", "model"));
    f.gpu = json_util::string_field(fj, "flop", "gpu");
    const auto& gpu = catalog.gpu(f.gpu);
    if (!gpu.tensor_flops_dense) throw SchemaError("flop.gpu", "GPU '" + f.gpu + "' has no tensor_flops_dense");
    f.model.gpu_throughput = *gpu.tensor_flops_dense;
    if (fj.contains("flop_multiplier")) f.model.flop_multiplier = json_util::positive_field(fj, "flop", "flop_multiplier");
    const auto& pj = json_util::member(fj, "flop", "power_model");
    const std::string pf = "flop.power_model";
    json_util::require_object(pj, pf);
    json_util::only_keys(pj, pf, {"server_power_w", "gpus_per_server", "overhead_fraction", "utilization_fraction"});
    auto& pm = f.model.power_model;
    pm.server_power = PowerW(json_util::positive_field(pj, pf, "server_power_w"));
    const auto gps = json_util::integer_field(pj, pf, "gpus_per_server");
    if (gps < 1) throw SchemaError(pf + ".gpus_per_server", "expected integer >= 1");
    pm.gpus_per_server = static_cast<std::uint64_t>(gps);
    pm.overhead_fraction = json_util::number_field(pj, pf, "overhead_fraction");
    pm.utilization_fraction = json_util::number_field(pj, pf, "utilization_fraction");
    try {
      validate(f.model);
    } catch (const InvalidValue& e) {
      throw SchemaError(pf, e.what());
    }
    if (!f.model.model.provenance.empty()) {
      sc.inputs.push_back("model " + f.model.model.name + " parameters: " + f.model.model.provenance);
    }
    f.tokens_per_action = detail::parse_token_source(json_util::member(root, "", "tokens_per_action"),
                                                     "tokens_per_action", base_dir, &f.model.model, sc.inputs);
    sc.mode = std::move(f);
  } else {
    throw SchemaError("mode", "expected \"pipeline\" or \"flop\"");
  }
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path, const Catalog& catalog) {
  return parse_scenario(json_util::read_file(path, "scenario"), path.parent_path(), catalog, path.string());
}

}  // namespace wattbench
