#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <memory>
#include <map>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "wattbench/carbon.hpp"
#include "wattbench/catalog.hpp"
#include "wattbench/detail/csv.hpp"
#include "wattbench/estimate.hpp"
#include "wattbench/format.hpp"
#include "wattbench/measure.hpp"

// Golden-number regression over the bundled published values.
namespace wattbench {

struct PaperCheck {
  std::string name;
  double expected = 0.0;
  double tolerance = 0.0;  // absolute
  std::function<double()> actual;
  std::string note;        // set for documented deviations
  bool deviation = false;  // a miss is reported but not counted as a failure
};

struct CheckOutcome {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double delta = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool deviation = false;
  std::string note;
  std::string error;
};

struct CheckOptions {
  Co2Rounding co2_rounding = Co2Rounding::floor;
  EquivalenceSpec equivalence;
};

namespace detail {

inline csv::Document read_csv(const std::filesystem::path& p) {
  return csv::parse(json_util::read_file(p, "data file"), p.string());
}

/// Half a unit in the last printed decimal ("0.29" -> 0.005).
inline double half_unit(const std::string& printed) {
  const auto dot = printed.find('.');
  const int decimals = dot == std::string::npos ? 0 : static_cast<int>(printed.size() - dot - 1);
  return 0.5 * std::pow(10.0, -decimals) + 1e-9;
}

inline std::string cell_key(const std::string& agent, const std::string& gpu, const std::string& split) {
  return agent + "/" + gpu + (split.empty() ? "" : "/" + split);
}

// Appendix per-split cells that contradict the other GPUs of the same agent
// (rows shifted from the H100-NVL split table) or whose std input is printed
// at one significant figure.
inline const std::set<std::string>& per_token_deviations() {
  static const std::set<std::string> s{"MindAct/H100-NVL/cross-domain", "MindAct/H100-NVL/cross-task",
                                       "MindAct/RTX 3090/cross-domain"};
  return s;
}

// Printed total std exceeds the sum of the printed split stds.
inline const std::set<std::string>& total_std_deviations() {
  static const std::set<std::string> s{"MindAct/H200-SXM5", "Synapse/L40S"};
  return s;
}

}  // namespace detail

/// Builds every check without evaluating it. Files under `data_dir`:
/// scenarios/, paper/*.csv. The checks hold a reference to `catalog`.
inline std::vector<PaperCheck> paper_checks(const Catalog& catalog, const std::filesystem::path& data_dir,
                                            const CheckOptions& opt = {}) {
  namespace fs = std::filesystem;
  std::vector<PaperCheck> out;
  const fs::path paper = data_dir / "paper";
  auto add = [&](std::string name, double expected, double tol, std::function<double()> fn, std::string note = {},
                 bool deviation = false) {
    out.push_back({std::move(name), expected, tol, std::move(fn), std::move(note), deviation});
  };

  auto scenario = [&catalog, data_dir](const char* file) {
    auto sc = load_scenario(data_dir / "scenarios" / file, catalog);
    sc.rounding = Rounding::paper;
    return sc;
  };
  auto mindact = [scenario] { return estimate(scenario("mindact.json")); };
  auto laser_model = [scenario] {
    auto f = std::get<FlopScenario>(scenario("laser.json").mode);
    f.model.rounding = Rounding::paper;
    return f;
  };
  auto laser = [scenario] { return estimate(scenario("laser.json")); };

  add("estimate.mindact.action_wh", 0.49, 0.005, [mindact] { return mindact().energy_per_action.value(); });
  add("estimate.mindact.total_kwh", 8.5, 0.1, [mindact] { return mindact().energy_total.in(EnergyUnit::kWh); });
  add("estimate.laser.flops_per_token", 444e9, 0.5e9, [laser_model] { return flops_per_token(laser_model().model); });
  add("estimate.laser.token_time_s", 2.22e-4, 0.005e-4, [laser_model] {
    const auto f = laser_model();
    return token_compute_time(flops_per_token(f.model), f.model.gpu_throughput).value();
  });
  add("estimate.laser.gpu_power_w", 1000.0, 0.0, [laser_model] {
    return effective_gpu_power(laser_model().model.power_model, Rounding::paper).value();
  });
  add("estimate.laser.energy_per_token_wh", 6.17e-5, 6.17e-5 * 0.005,
      [laser_model] { return flop_energy_per_token(laser_model().model); });
  add("estimate.laser.action_wh", 5.78, 0.005, [laser] { return laser().energy_per_action.value(); });
  add("estimate.laser.total_kwh", 99.21, 0.2, [laser] { return laser().energy_total.in(EnergyUnit::kWh); });

  // Estimation gap ratios, each within 15% of the published ratio.
  const auto eff = detail::read_csv(paper / "efficiency_h100nvl.csv");
  double mindact_benchmark = 0.0;
  for (const auto& r : eff.rows) {
    if (r.fields[eff.column("agent")] == "MindAct") {
      mindact_benchmark = csv::field_double(eff, r, eff.column("energy_kwh"));
    }
  }
  add("gap.mindact_estimate_over_benchmark", 8.5 / 1.22, 8.5 / 1.22 * 0.15, [mindact, mindact_benchmark] {
    return mindact().energy_total.in(EnergyUnit::kWh) / mindact_benchmark;
  });
  add("gap.laser_over_mindact_estimate", 99.21 / 9.01, 99.21 / 9.01 * 0.15, [mindact, laser] {
    return laser().energy_total.value() / mindact().energy_total.value();
  }, "prose says approximately 10x");

  // CO2 cells.
  const char* region_cols[] = {"norway_g", "us_g", "australia_g"};
  const char* regions[] = {"Norway", "US", "Australia"};
  auto co2_cell = [&catalog, opt](double kwh, std::string region) {
    return [&catalog, opt, kwh, region] {
      return static_cast<double>(
          co2_grams(EnergyWh::from(kwh, EnergyUnit::kWh), catalog.emission_factor(region), opt.co2_rounding).value());
    };
  };
  const auto main = detail::read_csv(paper / "co2_main.csv");
  for (const auto& r : main.rows) {
    const auto agent = r.fields[main.column("agent")];
    const auto method = r.fields[main.column("method")];
    const double kwh = csv::field_double(main, r, main.column("energy_kwh"));
    for (int k = 0; k < 3; ++k) {
      double expected = csv::field_double(main, r, main.column(region_cols[k]));
      std::string note;
      if (agent == "Synapse" && std::string(regions[k]) == "US" && expected == 783) {
        expected = 788;
        note = "main table prints 783; 1.74 x 453 = 788.22 and the appendix prints 788";
      }
      add("co2.main." + method + "." + agent + "." + regions[k], expected, 0.0, co2_cell(kwh, regions[k]), note);
    }
  }
  const auto app = detail::read_csv(paper / "co2_appendix.csv");
  for (const auto& r : app.rows) {
    const auto key = detail::cell_key(r.fields[app.column("agent")], r.fields[app.column("gpu")], "");
    const double kwh = csv::field_double(app, r, app.column("energy_kwh"));
    for (int k = 0; k < 3; ++k) {
      add("co2.appendix." + key + "." + regions[k], csv::field_double(app, r, app.column(region_cols[k])), 1.0,
          co2_cell(kwh, regions[k]));
    }
  }

  // Car-distance equivalences (displayed precision).
  for (auto [kwh, region, km] : {std::tuple{0.33, "US", 0.6}, std::tuple{3.31, "US", 6.0}, std::tuple{99.21, "US", 181.0}}) {
    const auto grams = co2_cell(kwh, region);
    add("car.km." + fmt::compact(kwh, 2) + "kWh." + region, km, 1e-9, [grams, opt] {
      return round_car_distance(car_distance_km(GramsCO2e(static_cast<std::int64_t>(grams())), opt.equivalence));
    });
  }

  // Energy per token: printed split energy / token total vs printed kWh/token.
  const auto split = detail::read_csv(paper / "split_energy.csv");
  for (const auto& r : split.rows) {
    const auto agent = r.fields[split.column("agent")];
    const auto gpu = r.fields[split.column("gpu")];
    const auto sname = r.fields[split.column("split")];
    const auto key = detail::cell_key(agent, gpu, sname);
    const bool dev = detail::per_token_deviations().count(key) > 0;
    const std::string note = !dev                   ? ""
                             : gpu == "H100-NVL" ? "printed cell inconsistent with the other GPUs' token totals"
                                                 : "std input printed at one significant figure";
    const double e = csv::field_double(split, r, split.column("energy_kwh"));
    const double es = csv::field_double(split, r, split.column("energy_std_kwh"));
    const double pt = csv::field_double(split, r, split.column("per_token_e9_kwh"));
    const double pts = csv::field_double(split, r, split.column("per_token_std_e9_kwh"));
    auto tokens = [&catalog, agent, sname] {
      const auto& bench = catalog.benchmark("Mind2Web");
      const auto* s = bench.find_split(sname);
      if (!s || !s->token_totals.count(agent)) throw NotFound("no token total for " + agent + "/" + sname);
      return s->token_totals.at(agent);
    };
    add("per_token.mean." + key, pt, pt * 0.015, [tokens, e] {
      return energy_per_token({e * 1000.0, 0.0, 5}, tokens()).mean / 1000.0 * 1e9;
    }, note, dev);
    add("per_token.std." + key, pts, pts * 0.02, [tokens, es] {
      return energy_per_token({0.0, es * 1000.0, 5}, tokens()).std / 1000.0 * 1e9;
    }, note, dev);
  }

  // Efficiency and energy/time tables rebuilt from the run fixtures.
  auto table_checks = [&](const std::string& prefix, const fs::path& runs_file, const csv::Document& ref) {
    auto results = std::make_shared<std::map<std::string, AgentResult>>();
    auto compute = [results, runs_file] {
      if (!results->empty()) return;
      const auto runs = load_run_records(runs_file);
      std::map<std::string, std::vector<RunRecord>> groups;
      for (const auto& r : runs) groups[detail::cell_key(r.agent, r.gpu, "")].push_back(r);
      for (const auto& [k, v] : groups) (*results)[k] = summarize_agent(v, 0.0);
    };
    const bool has_gpu = ref.has_column("gpu");
    for (const auto& r : ref.rows) {
      const auto agent = r.fields[ref.column("agent")];
      const auto gpu = has_gpu ? r.fields[ref.column("gpu")] : std::string("H100-NVL");
      const auto key = detail::cell_key(agent, gpu, "");
      const bool dev = detail::total_std_deviations().count(key) > 0;
      struct Field {
        const char* col;
        double AggregateStat::*member;
        AggregateStat AgentResult::*stat;
      };
      for (auto f : {Field{"energy_kwh", &AggregateStat::mean, &AgentResult::energy_kwh},
                     Field{"energy_std_kwh", &AggregateStat::std, &AgentResult::energy_kwh},
                     Field{"time_min", &AggregateStat::mean, &AgentResult::time_min},
                     Field{"time_std_min", &AggregateStat::std, &AgentResult::time_min}}) {
        const auto& printed = r.fields[ref.column(f.col)];
        const bool is_dev = dev && std::string(f.col) == "energy_std_kwh";
        add(prefix + "." + key + "." + f.col, csv::field_double(ref, r, ref.column(f.col)), detail::half_unit(printed),
            [results, compute, key, f] {
              compute();
              auto it = results->find(key);
              if (it == results->end()) throw NotFound("no runs for " + key);
              return (it->second.*f.stat).*f.member;
            },
            is_dev ? "printed total std exceeds the sum of the split stds" : "", is_dev);
      }
    }
  };
  table_checks("efficiency", paper / "runs_h100nvl.csv", eff);
  table_checks("energy_time", paper / "runs_appendix.csv", detail::read_csv(paper / "total_energy.csv"));
  return out;
}

inline CheckOutcome run_check(const PaperCheck& c) {
  CheckOutcome o;
  o.name = c.name;
  o.expected = c.expected;
  o.tolerance = c.tolerance;
  o.deviation = c.deviation;
  o.note = c.note;
  try {
    o.actual = c.actual();
    o.delta = o.actual - o.expected;
    o.pass = std::abs(o.delta) <= c.tolerance * (1 + 1e-12) + 1e-15 * std::abs(o.expected);
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

/// "PASS", "FAIL" or "DEVIATION" (documented miss, not counted).
inline std::string status(const CheckOutcome& o) {
  if (o.pass) return "PASS";
  return o.deviation && o.error.empty() ? "DEVIATION" : "FAIL";
}

inline std::string number(double x, int sig_figs) {
  const double a = std::abs(x);
  if (a != 0.0 && (a < 1e-3 || a >= 1e6)) {
    auto s = fmt::sci(x, sig_figs);
    const auto e = s.find('e');
    return fmt::strip_zeros(s.substr(0, e)) + s.substr(e);
  }
  return fmt::strip_zeros(fmt::sig(x, sig_figs));
}

inline std::string describe(const CheckOutcome& o) {
  std::string s = status(o) + " " + o.name;
  if (!o.error.empty()) return s + " error: " + o.error;
  s += " expected=" + number(o.expected, 6) + " actual=" + number(o.actual, 6) + " delta=" + number(o.delta, 3) +
       " tol=" + number(o.tolerance, 3);
  if (!o.note.empty()) s += " (" + o.note + ")";
  return s;
}

}  // namespace wattbench
