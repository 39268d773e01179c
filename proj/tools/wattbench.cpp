#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wattbench/wattbench.hpp"

#ifndef WATTBENCH_DATA_DIR
#define WATTBENCH_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace wattbench;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kInput = 2;

struct Config {
  std::string catalog;
  std::string format = "markdown";
  std::string rounding;  // empty: scenario's own setting
  std::string co2_rounding = "floor";
  double car_g_per_km = 248.55;
  std::string out;
};

fs::path catalog_path(const Config& cfg) {
  if (!cfg.catalog.empty()) return cfg.catalog;
  if (const char* env = std::getenv("WATTBENCH_CATALOG"); env && *env) return env;
  return fs::path(WATTBENCH_DATA_DIR) / "catalog.json";
}

void emit(const Config& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw IoError("cannot write '" + cfg.out + "'");
  f << text;
}

int cmd_integrate(const Config& cfg, const std::vector<std::string>& manifests) {
  std::vector<RunRecord> records;
  for (const auto& path : manifests) {
    const auto m = load_manifest(path);
    const auto bundle = load_bundle(m);
    DurationS span;
    for (const auto& t : bundle.traces()) {
      for (const auto& g : find_gaps(t)) {
        std::cerr << "warning: " << path << ": device " << t.device_id() << ": interval of " << fmt::compact(g.interval_s)
                  << " s before sample " << g.index << " exceeds 10x the median " << fmt::compact(g.median_s) << " s\n";
      }
      span = std::max(span, t.span());
    }
    records.push_back({m.agent, m.gpu, m.split, m.run_index, bundle_energy(bundle), span});
  }
  emit(cfg, render_run_records(records));
  return kOk;
}

ReportTable split_table(const std::vector<RunRecord>& runs) {
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<RunRecord>> groups;
  for (const auto& r : runs) groups[{r.agent, r.gpu, r.split}].push_back(r);
  ReportTable t;
  t.title = "Energy and time per split";
  t.columns = {{"Agent", ""}, {"GPU", ""}, {"Split", ""}, {"Runs", ""}, {"Energy", "kWh"}, {"Time", "min"}};
  for (const auto& [key, g] : groups) {
    const auto e = aggregate_runs(g, RunMetric::energy_wh);
    const auto d = aggregate_runs(g, RunMetric::duration_s);
    t.add_row({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::to_string(e.n),
               fmt::fixed_uncertainty(e.mean / 1000.0, e.std / 1000.0, 3), fmt::fixed_uncertainty(d.mean / 60.0, d.std / 60.0, 1)});
  }
  t.footnotes.push_back("Spread is the sample (n-1) standard deviation over runs.");
  return t;
}

std::vector<AgentResult> summarize_all(const std::vector<RunRecord>& runs, const std::map<std::string, double>& ssr) {
  std::map<std::pair<std::string, std::string>, std::vector<RunRecord>> groups;
  for (const auto& r : runs) groups[{r.agent, r.gpu}].push_back(r);
  std::vector<AgentResult> out;
  for (const auto& [key, g] : groups) {
    auto it = ssr.find(key.first);
    out.push_back(summarize_agent(g, it == ssr.end() ? 0.0 : it->second));
  }
  return out;
}

int cmd_aggregate(const Config& cfg, const std::string& runs_file) {
  const auto runs = load_run_records(runs_file);
  if (runs.empty()) throw InvalidValue("no run records in '" + runs_file + "'");
  emit(cfg, render(std::vector<ReportTable>{split_table(runs), build_energy_time_table(summarize_all(runs, {}))},
                   parse_format(cfg.format)));
  return kOk;
}

std::vector<EstimateResult> run_estimates(const Config& cfg, const Catalog& catalog, const std::vector<std::string>& files) {
  std::vector<EstimateResult> out;
  for (const auto& f : files) {
    auto sc = load_scenario(f, catalog);
    if (!cfg.rounding.empty()) sc.rounding = parse_rounding(cfg.rounding);
    out.push_back(estimate(sc));
  }
  return out;
}

ReportTable estimate_table(const std::vector<EstimateResult>& results) {
  ReportTable t;
  t.title = "Theoretical energy estimates";
  t.columns = {{"Agent", ""}, {"Energy/Action", "Wh"}, {"Total", "kWh"}};
  for (const auto& r : results) {
    t.add_row({r.agent, display_action_wh(r.energy_per_action), display_total_kwh(r.energy_total)});
    for (const auto& a : r.assumptions) t.footnotes.push_back(r.agent + ": " + a);
  }
  return t;
}

int cmd_estimate(const Config& cfg, const std::vector<std::string>& files) {
  const auto catalog = load_catalog(catalog_path(cfg));
  emit(cfg, render(estimate_table(run_estimates(cfg, catalog, files)), parse_format(cfg.format)));
  return kOk;
}

std::vector<EmissionFactor> pick_factors(const Catalog& catalog, const std::vector<std::string>& regions) {
  if (regions.empty()) return catalog.emission_factors();
  std::vector<EmissionFactor> out;
  for (const auto& r : regions) out.push_back(catalog.emission_factor(r));
  return out;
}

int cmd_carbon(const Config& cfg, const std::vector<std::string>& entries, const std::vector<std::string>& regions) {
  const auto catalog = load_catalog(catalog_path(cfg));
  const auto factors = pick_factors(catalog, regions);
  const auto rounding = parse_co2_rounding(cfg.co2_rounding);
  const EquivalenceSpec eq{cfg.car_g_per_km};
  std::vector<CarbonEntry> rows;
  for (const auto& e : entries) {
    const auto eqpos = e.find('=');
    if (eqpos == std::string::npos) throw InvalidValue("expected AGENT=KWH, got '" + e + "'");
    const auto v = csv::to_double(e.substr(eqpos + 1));
    if (!v) throw InvalidValue("not a number in '" + e + "'");
    rows.push_back({"", e.substr(0, eqpos), std::nullopt, EnergyWh::from(*v, EnergyUnit::kWh)});
  }
  ReportTable km;
  km.title = "Car-distance equivalent";
  km.columns = {{"Agent", ""}, {"Region", ""}, {"CO2", "g"}, {"Distance", "km"}};
  for (const auto& r : rows) {
    for (const auto& f : factors) {
      const auto c = carbon_result(r.energy, f, rounding, eq);
      km.add_row({r.agent, f.region, std::to_string(c.grams.value()), format_car_distance(c.car_km)});
    }
  }
  km.footnotes.push_back("Distances assume " + fmt::compact(eq.car_g_per_km, 2) + " g per km driven.");
  auto table = carbon_table(rows, factors, rounding);
  table.columns.erase(table.columns.begin());
  for (auto& row : table.rows) row.erase(row.begin());
  emit(cfg, render(std::vector<ReportTable>{table, km}, parse_format(cfg.format)));
  return kOk;
}

struct ReportArgs {
  std::string runs;
  std::string ssr;
  std::string gpu = "H100-NVL";
  std::string benchmark = "Mind2Web";
  std::vector<std::string> scenarios;
  std::vector<std::string> regions;
  bool all_gpus = false;
};

int cmd_report(const Config& cfg, const ReportArgs& a) {
  const auto catalog = load_catalog(catalog_path(cfg));
  const auto format = parse_format(cfg.format);
  const auto rounding = parse_co2_rounding(cfg.co2_rounding);
  const auto factors = pick_factors(catalog, a.regions);
  auto runs = load_run_records(a.runs);
  if (!a.all_gpus) std::erase_if(runs, [&](const RunRecord& r) { return r.gpu != a.gpu; });
  if (runs.empty()) throw InvalidValue("no run records" + (a.all_gpus ? std::string() : " for GPU '" + a.gpu + "'"));

  std::map<std::string, double> ssr;
  if (!a.ssr.empty()) ssr = load_ssr(a.ssr);
  if (!a.all_gpus || !a.ssr.empty()) {
    std::set<std::string> missing;
    for (const auto& r : runs) {
      if (!ssr.count(r.agent)) missing.insert(r.agent);
    }
    if (!missing.empty()) {
      std::string msg = "agents missing from the SSR file:";
      for (const auto& m : missing) msg += " " + m;
      msg += "; SSR file lists:";
      for (const auto& [k, v] : ssr) msg += " " + k;
      throw NotFound(msg);
    }
  }

  std::vector<ReportTable> tables;
  const auto results = summarize_all(runs, ssr);
  tables.push_back(a.all_gpus ? build_energy_time_table(results) : build_efficiency_table(results));
  tables.push_back(build_energy_per_token_table(split_energies(runs, catalog.benchmark(a.benchmark)), a.all_gpus));

  std::vector<CarbonEntry> entries;
  for (const auto& r : results) {
    entries.push_back({"Benchmarking", r.agent, a.all_gpus ? std::optional(r.gpu) : std::nullopt,
                       EnergyWh::from(r.energy_kwh.mean, EnergyUnit::kWh)});
  }
  const auto estimates = run_estimates(cfg, catalog, a.scenarios);
  for (const auto& e : estimates) {
    entries.push_back({"Estimation", e.agent, a.all_gpus ? std::optional<std::string>("") : std::nullopt, e.energy_total});
  }
  tables.push_back(carbon_table(entries, factors, rounding));

  if (!estimates.empty()) {
    tables.push_back(estimate_table(estimates));
    ReportTable cmp;
    cmp.title = "Estimation versus benchmark";
    cmp.columns = {{"Comparison", ""}, {"Ratio", ""}};
    std::vector<const EstimateResult*> anchored;
    for (const auto& e : estimates) {
      for (const auto& r : results) {
        if (r.agent != e.agent || r.energy_kwh.mean <= 0) continue;
        cmp.add_row({e.agent + " estimate / " + e.agent + " benchmark (" + r.gpu + ")",
                     fmt::fixed(e.energy_total.in(EnergyUnit::kWh) / r.energy_kwh.mean, 2)});
        anchored.push_back(&e);
      }
    }
    for (const auto& e : estimates) {
      for (const auto* ref : anchored) {
        if (ref->agent == e.agent || ref->energy_total.value() <= 0) continue;
        cmp.add_row({e.agent + " estimate / " + ref->agent + " estimate", fmt::fixed(e.energy_total / ref->energy_total, 2)});
      }
    }
    if (!cmp.rows.empty()) tables.push_back(cmp);
  }
  emit(cfg, render(tables, format));
  return kOk;
}

int cmd_validate(const Config& cfg, const std::string& data_dir, bool list) {
  const auto catalog = load_catalog(catalog_path(cfg));
  CheckOptions opt{parse_co2_rounding(cfg.co2_rounding), EquivalenceSpec{cfg.car_g_per_km}};
  const auto checks = paper_checks(catalog, data_dir, opt);
  std::string out;
  if (list) {
    for (const auto& c : checks) out += c.name + "\n";
    emit(cfg, out);
    return kOk;
  }
  std::size_t passed = 0, failed = 0, deviations = 0;
  for (const auto& c : checks) {
    const auto o = run_check(c);
    const auto s = status(o);
    passed += s == "PASS";
    failed += s == "FAIL";
    deviations += s == "DEVIATION";
    out += describe(o) + "\n";
  }
  out += std::to_string(checks.size()) + " checks: " + std::to_string(passed) + " passed, " + std::to_string(failed) +
         " failed, " + std::to_string(deviations) + " documented deviations\n";
  emit(cfg, out);
  return failed == 0 ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy and CO2 accounting for web-agent benchmarks"};
  app.require_subcommand(1);
  app.fallthrough();
  Config cfg;
  app.add_option("--catalog", cfg.catalog, "Catalog JSON (default: $WATTBENCH_CATALOG, then the bundled catalog)");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"markdown", "csv", "json"}));
  app.add_option("--rounding", cfg.rounding, "Estimate rounding mode")->check(CLI::IsMember({"exact", "paper"}));
  app.add_option("--co2-rounding", cfg.co2_rounding, "Gram rounding")->check(CLI::IsMember({"floor", "nearest"}));
  app.add_option("--car-g-per-km", cfg.car_g_per_km, "Car emissions per km")->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out, "Write output here instead of stdout");

  std::vector<std::string> manifests;
  auto* integrate = app.add_subcommand("integrate", "Integrate trace bundles into run records (CSV)");
  integrate->add_option("manifests", manifests, "Bundle manifest JSON files")->required();

  std::string runs_file;
  auto* aggregate_cmd = app.add_subcommand("aggregate", "Mean and spread of run records per split and per agent");
  aggregate_cmd->add_option("runs", runs_file, "Run-record CSV")->required();

  std::vector<std::string> scenario_files;
  auto* estimate_cmd = app.add_subcommand("estimate", "Theoretical energy estimate from scenario files");
  estimate_cmd->add_option("scenarios", scenario_files, "Scenario JSON files")->required();

  std::vector<std::string> entries, regions;
  auto* carbon = app.add_subcommand("carbon", "Convert energies to CO2 and car distance");
  carbon->add_option("entries", entries, "AGENT=KWH pairs")
      ->required()
      ->check(CLI::Validator(
          [](std::string& e) { return e.find('=') == std::string::npos ? "expected AGENT=KWH, got '" + e + "'" : std::string(); },
          "AGENT=KWH"));
  carbon->add_option("--region", regions, "Restrict to these regions");

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Efficiency, energy-per-token, CO2 and comparison tables");
  report->add_option("--runs", ra.runs, "Run-record CSV")->required();
  report->add_option("--ssr", ra.ssr, "Average step success rate CSV (agent,avg_ssr)");
  report->add_option("--gpu", ra.gpu, "GPU to report");
  report->add_option("--benchmark", ra.benchmark, "Benchmark with split token totals");
  report->add_option("--scenario", ra.scenarios, "Estimation scenarios to compare against");
  report->add_option("--region", ra.regions, "Restrict CO2 columns to these regions");
  report->add_flag("--all-gpus", ra.all_gpus, "Report every GPU in the run records");

  std::string data_dir = WATTBENCH_DATA_DIR;
  bool list = false;
  auto* validate_cmd = app.add_subcommand("validate-paper", "Golden-number regression over the bundled published values");
  validate_cmd->add_option("--data-dir", data_dir, "Directory with paper/ and scenarios/");
  validate_cmd->add_flag("--list", list, "List checks without running them");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*integrate) return cmd_integrate(cfg, manifests);
    if (*aggregate_cmd) return cmd_aggregate(cfg, runs_file);
    if (*estimate_cmd) return cmd_estimate(cfg, scenario_files);
    if (*carbon) return cmd_carbon(cfg, entries, regions);
    if (*report) {
      if (ra.ssr.empty() && !ra.all_gpus) {
        std::cerr << "error: report needs --ssr unless --all-gpus is given\n";
        return kInput;
      }
      return cmd_report(cfg, ra);
    }
    if (*validate_cmd) return cmd_validate(cfg, data_dir, list);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const NotFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
