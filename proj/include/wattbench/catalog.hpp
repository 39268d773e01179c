#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wattbench/detail/json_util.hpp"
#include "wattbench/error.hpp"
#include "wattbench/quantities.hpp"

namespace wattbench {

struct GpuSpec {
  std::string name;
  std::string architecture;
  double vram_gb = 0;
  double fp32_tflops = 0;
  std::optional<double> tensor_flops_dense;  // FLOP/s; stored apart from fp32_tflops
  std::string notes;
};

struct EmissionFactor {
  std::string region;
  double g_per_kwh = 0;
};

struct SplitSpec {
  std::string name;
  std::map<std::string, TokenCount> token_totals;  // agent -> tokens
};

struct BenchmarkSpec {
  std::string name;
  std::int64_t task_count = 0;
  double avg_actions_per_task = 0;
  std::vector<SplitSpec> splits;

  const SplitSpec* find_split(std::string_view split) const {
    for (const auto& s : splits) {
      if (s.name == split) return &s;
    }
    return nullptr;
  }
};

enum class ModelKind { dense, mixture_of_experts };

struct ModelSpec {
  std::string name;
  ModelKind kind = ModelKind::dense;
  std::uint64_t total_params = 0;
  std::optional<std::uint64_t> experts;
  std::optional<std::uint64_t> params_per_expert;
  std::optional<std::uint64_t> experts_active;
  std::optional<TokenCount> max_input_tokens;
  std::string provenance;
};

/// Parameters exercised per forward pass.
inline std::uint64_t active_params(const ModelSpec& m) {
  if (m.kind == ModelKind::dense) return m.total_params;
  return m.experts_active.value() * m.params_per_expert.value();
}

/// Immutable registry; lookups return nullptr for unknown keys, the
/// reference-returning accessors throw NotFound.
class Catalog {
 public:
  Catalog() = default;
  Catalog(std::vector<GpuSpec> gpus, std::vector<EmissionFactor> factors,
          std::vector<BenchmarkSpec> benchmarks, std::vector<ModelSpec> models)
      : gpus_(std::move(gpus)),
        factors_(std::move(factors)),
        benchmarks_(std::move(benchmarks)),
        models_(std::move(models)) {
    check_unique(gpus_, "gpus", [](const GpuSpec& g) { return g.name; });
    check_unique(factors_, "emission_factors", [](const EmissionFactor& f) { return f.region; });
    check_unique(benchmarks_, "benchmarks", [](const BenchmarkSpec& b) { return b.name; });
    check_unique(models_, "models", [](const ModelSpec& m) { return m.name; });
  }

  const std::vector<GpuSpec>& gpus() const noexcept { return gpus_; }
  const std::vector<EmissionFactor>& emission_factors() const noexcept { return factors_; }
  const std::vector<BenchmarkSpec>& benchmarks() const noexcept { return benchmarks_; }
  const std::vector<ModelSpec>& models() const noexcept { return models_; }

  const GpuSpec* find_gpu(std::string_view n) const { return find(gpus_, n, &GpuSpec::name); }
  const EmissionFactor* find_emission_factor(std::string_view r) const {
    return find(factors_, r, &EmissionFactor::region);
  }
  const BenchmarkSpec* find_benchmark(std::string_view n) const {
    return find(benchmarks_, n, &BenchmarkSpec::name);
  }
  const ModelSpec* find_model(std::string_view n) const { return find(models_, n, &ModelSpec::name); }

  const GpuSpec& gpu(std::string_view n) const { return need(find_gpu(n), "GPU", n); }
  const EmissionFactor& emission_factor(std::string_view r) const {
    return need(find_emission_factor(r), "emission factor", r);
  }
  const BenchmarkSpec& benchmark(std::string_view n) const {
    return need(find_benchmark(n), "benchmark", n);
  }
  const ModelSpec& model(std::string_view n) const { return need(find_model(n), "model", n); }

 private:
  template <typename T, typename Key>
  static void check_unique(const std::vector<T>& items, const char* section, Key key) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (key(items[i]) == key(items[j])) {
          throw SchemaError(std::string(section) + "[" + std::to_string(i) + "]",
                            "duplicate key '" + key(items[i]) + "'");
        }
      }
    }
  }

  template <typename T>
  static const T* find(const std::vector<T>& items, std::string_view key, std::string T::*field) {
    for (const auto& item : items) {
      if (item.*field == key) return &item;
    }
    return nullptr;
  }

  template <typename T>
  static const T& need(const T* p, const char* what, std::string_view key) {
    if (!p) throw NotFound(std::string(what) + " '" + std::string(key) + "' not in catalog");
    return *p;
  }

  std::vector<GpuSpec> gpus_;
  std::vector<EmissionFactor> factors_;
  std::vector<BenchmarkSpec> benchmarks_;
  std::vector<ModelSpec> models_;
};

namespace detail {

using json_util::json;

inline std::uint64_t positive_count(const json& obj, const std::string& parent, std::string_view key) {
  const auto v = json_util::integer_field(obj, parent, key);
  if (v <= 0) throw SchemaError(json_util::join(parent, key), "expected positive integer");
  return static_cast<std::uint64_t>(v);
}

inline GpuSpec parse_gpu(const json& j, const std::string& f) {
  json_util::require_object(j, f);
  json_util::only_keys(j, f, {"name", "architecture", "vram_gb", "fp32_tflops", "tensor_flops_dense", "notes"});
  GpuSpec g;
  g.name = json_util::string_field(j, f, "name");
  g.architecture = json_util::string_field(j, f, "architecture");
  g.vram_gb = json_util::positive_field(j, f, "vram_gb");
  g.fp32_tflops = json_util::positive_field(j, f, "fp32_tflops");
  if (j.contains("tensor_flops_dense")) g.tensor_flops_dense = json_util::positive_field(j, f, "tensor_flops_dense");
  if (j.contains("notes")) g.notes = json_util::string_field(j, f, "notes");
  return g;
}

inline EmissionFactor parse_factor(const json& j, const std::string& f) {
  json_util::require_object(j, f);
  json_util::only_keys(j, f, {"region", "g_per_kwh", "provenance"});
  EmissionFactor e;
  e.region = json_util::string_field(j, f, "region");
  e.g_per_kwh = json_util::number_field(j, f, "g_per_kwh");
  if (e.g_per_kwh < 0) throw SchemaError(json_util::join(f, "g_per_kwh"), "expected non-negative number");
  return e;
}

inline BenchmarkSpec parse_benchmark(const json& j, const std::string& f) {
  json_util::require_object(j, f);
  json_util::only_keys(j, f, {"name", "task_count", "avg_actions_per_task", "splits", "provenance"});
  BenchmarkSpec b;
  b.name = json_util::string_field(j, f, "name");
  b.task_count = static_cast<std::int64_t>(positive_count(j, f, "task_count"));
  b.avg_actions_per_task = json_util::positive_field(j, f, "avg_actions_per_task");
  if (j.contains("splits")) {
    const auto sf = json_util::join(f, "splits");
    json_util::require_array(j["splits"], sf);
    for (std::size_t i = 0; i < j["splits"].size(); ++i) {
      const auto& s = j["splits"][i];
      const auto f2 = json_util::index(sf, i);
      json_util::require_object(s, f2);
      json_util::only_keys(s, f2, {"name", "token_totals"});
      SplitSpec split;
      split.name = json_util::string_field(s, f2, "name");
      if (b.find_split(split.name)) throw SchemaError(f2, "duplicate split '" + split.name + "'");
      if (s.contains("token_totals")) {
        const auto tf = json_util::join(f2, "token_totals");
        json_util::require_object(s["token_totals"], tf);
        for (const auto& [agent, v] : s["token_totals"].items()) {
          const auto n = json_util::integer_value(v, json_util::join(tf, agent));
          if (n < 0) throw SchemaError(json_util::join(tf, agent), "expected non-negative integer");
          split.token_totals.emplace(agent, TokenCount(static_cast<std::uint64_t>(n)));
        }
      }
      b.splits.push_back(std::move(split));
    }
  }
  return b;
}

inline ModelSpec parse_model(const json& j, const std::string& f) {
  json_util::require_object(j, f);
  json_util::only_keys(j, f, {"name", "kind", "total_params", "experts", "params_per_expert",
                              "experts_active", "max_input_tokens", "provenance"});
  ModelSpec m;
  m.name = json_util::string_field(j, f, "name");
  const auto kind = json_util::string_field(j, f, "kind");
  if (kind == "dense") m.kind = ModelKind::dense;
  else if (kind == "mixture-of-experts") m.kind = ModelKind::mixture_of_experts;
  else throw SchemaError(json_util::join(f, "kind"), "expected 'dense' or 'mixture-of-experts'");
  m.total_params = positive_count(j, f, "total_params");
  if (j.contains("experts")) m.experts = positive_count(j, f, "experts");
  if (j.contains("params_per_expert")) m.params_per_expert = positive_count(j, f, "params_per_expert");
  if (j.contains("experts_active")) m.experts_active = positive_count(j, f, "experts_active");
  if (j.contains("max_input_tokens")) m.max_input_tokens = TokenCount(positive_count(j, f, "max_input_tokens"));
  if (j.contains("provenance")) m.provenance = json_util::string_field(j, f, "provenance");
  if (m.kind == ModelKind::mixture_of_experts) {
    if (!m.experts) throw SchemaError(json_util::join(f, "experts"), "required for mixture-of-experts");
    if (!m.params_per_expert) throw SchemaError(json_util::join(f, "params_per_expert"), "required for mixture-of-experts");
    if (!m.experts_active) throw SchemaError(json_util::join(f, "experts_active"), "required for mixture-of-experts");
    if (*m.experts_active > *m.experts) throw SchemaError(json_util::join(f, "experts_active"), "exceeds experts");
  }
  return m;
}

template <typename T, typename Fn>
std::vector<T> parse_section(const json& root, const char* key, Fn fn) {
  std::vector<T> out;
  if (!root.contains(key)) return out;
  json_util::require_array(root[key], key);
  for (std::size_t i = 0; i < root[key].size(); ++i) out.push_back(fn(root[key][i], json_util::index(key, i)));
  return out;
}

}  // namespace detail

/// Parses catalog JSON. Blank text is an empty catalog.
inline Catalog parse_catalog(std::string_view text, const std::string& source = "<catalog>") {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return Catalog{};
  const auto root = json_util::parse(text, source);
  json_util::require_object(root, "");
  json_util::only_keys(root, "", {"gpus", "emission_factors", "benchmarks", "models"});
  return Catalog(detail::parse_section<GpuSpec>(root, "gpus", detail::parse_gpu),
                 detail::parse_section<EmissionFactor>(root, "emission_factors", detail::parse_factor),
                 detail::parse_section<BenchmarkSpec>(root, "benchmarks", detail::parse_benchmark),
                 detail::parse_section<ModelSpec>(root, "models", detail::parse_model));
}

inline Catalog load_catalog(const std::filesystem::path& path) {
  return parse_catalog(json_util::read_file(path, "catalog"), path.string());
}

}  // namespace wattbench
