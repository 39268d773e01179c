#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "wattbench/catalog.hpp"
#include "wattbench/detail/csv.hpp"
#include "wattbench/detail/sum.hpp"
#include "wattbench/error.hpp"
#include "wattbench/format.hpp"
#include "wattbench/quantities.hpp"
#include "wattbench/report.hpp"

namespace wattbench {

struct RunRecord {
  std::string agent;
  std::string gpu;
  std::string split;
  int run_index = 0;
  EnergyWh energy;
  DurationS duration;
};

struct AggregateStat {
  double mean = 0.0;
  double std = 0.0;  // sample (n-1) standard deviation
  std::size_t n = 0;
};

struct AgentResult {
  std::string agent;
  std::string gpu;
  double avg_ssr = 0.0;       // percent, ingested
  AggregateStat energy_kwh;
  AggregateStat time_min;
};

/// Mean and sample std. Values are sorted first so the result does not
/// depend on input order; Welford's update accumulates them.
inline AggregateStat aggregate(std::span<const double> values) {
  if (values.empty()) throw InvalidValue("cannot aggregate an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const auto n = static_cast<double>(v.size());
  detail::CompensatedSum total;
  for (double x : v) total.add(x);
  const double mean = total.value() / n;
  // Corrected two-pass: the residual sum cancels the rounding left in the mean.
  detail::CompensatedSum dev, sq;
  for (double x : v) {
    const double d = x - mean;
    dev.add(d);
    sq.add(d * d);
  }
  const double m = mean + dev.value() / n;
  const double var = v.size() > 1 ? (sq.value() - dev.value() * dev.value() / n) / (n - 1) : 0.0;
  return {m, std::sqrt(std::max(var, 0.0)), v.size()};
}

enum class RunMetric { energy_wh, duration_s };

/// Aggregates one (agent, gpu, split) group.
inline AggregateStat aggregate_runs(std::span<const RunRecord> records, RunMetric metric = RunMetric::energy_wh) {
  if (records.empty()) throw InvalidValue("aggregate_runs: no records");
  const auto& k = records.front();
  std::vector<double> values;
  for (const auto& r : records) {
    if (r.agent != k.agent || r.gpu != k.gpu || r.split != k.split) {
      throw InvalidValue("aggregate_runs: mixed groups (" + k.agent + "/" + k.gpu + "/" + k.split + " vs " +
                         r.agent + "/" + r.gpu + "/" + r.split + ")");
    }
    values.push_back(metric == RunMetric::energy_wh ? r.energy.value() : r.duration.value());
  }
  return aggregate(values);
}

/// Tokens are exact, so mean and std both scale by 1/tokens.
inline EnergyPerTokenWh energy_per_token(const AggregateStat& energy_wh, TokenCount tokens) {
  if (tokens.value() == 0) throw InvalidValue("energy_per_token: token count is zero");
  const auto t = static_cast<double>(tokens.value());
  return {energy_wh.mean / t, energy_wh.std / t};
}

inline std::vector<RunRecord> parse_run_records(std::string_view text, const std::string& source = "<runs>") {
  const auto doc = csv::parse(text, source);
  const auto c_agent = doc.column("agent"), c_gpu = doc.column("gpu"), c_split = doc.column("split"),
             c_idx = doc.column("run_index"), c_e = doc.column("energy_wh"), c_d = doc.column("duration_s");
  std::vector<RunRecord> out;
  std::set<std::tuple<std::string, std::string, std::string, int>> seen;
  for (const auto& row : doc.rows) {
    RunRecord r;
    r.agent = row.fields[c_agent];
    r.gpu = row.fields[c_gpu];
    r.split = row.fields[c_split];
    r.run_index = static_cast<int>(csv::field_int(doc, row, c_idx));
    const double e = csv::field_double(doc, row, c_e);
    const double d = csv::field_double(doc, row, c_d);
    if (!(e >= 0) || !(d >= 0)) throw ParseError(source, row.line, "energy and duration must be non-negative");
    r.energy = EnergyWh(e);
    r.duration = DurationS(d);
    if (!seen.emplace(r.agent, r.gpu, r.split, r.run_index).second) {
      throw ParseError(source, row.line,
                       "duplicate run_index " + std::to_string(r.run_index) + " for " + r.agent + "/" + r.gpu + "/" + r.split);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<RunRecord> load_run_records(const std::filesystem::path& path) {
  return parse_run_records(json_util::read_file(path, "run-record file"), path.string());
}

inline std::string render_run_records(std::span<const RunRecord> records) {
  std::string out = "agent,gpu,split,run_index,energy_wh,duration_s\n";
  for (const auto& r : records) {
    out += csv::escape(r.agent) + "," + csv::escape(r.gpu) + "," + csv::escape(r.split) + "," +
           std::to_string(r.run_index) + "," + fmt::strip_zeros(fmt::fixed(r.energy.value(), 6)) + "," +
           fmt::strip_zeros(fmt::fixed(r.duration.value(), 3)) + "\n";
  }
  return out;
}

/// agent -> average step success rate (percent).
inline std::map<std::string, double> parse_ssr(std::string_view text, const std::string& source = "<ssr>") {
  const auto doc = csv::parse(text, source);
  const auto c_agent = doc.column("agent"), c_ssr = doc.column("avg_ssr");
  std::map<std::string, double> out;
  for (const auto& row : doc.rows) {
    const double v = csv::field_double(doc, row, c_ssr);
    if (v < 0 || v > 100) throw ParseError(source, row.line, "avg_ssr must be within [0, 100]");
    if (!out.emplace(row.fields[c_agent], v).second) {
      throw ParseError(source, row.line, "duplicate agent '" + row.fields[c_agent] + "'");
    }
  }
  return out;
}

inline std::map<std::string, double> load_ssr(const std::filesystem::path& path) {
  return parse_ssr(json_util::read_file(path, "SSR file"), path.string());
}

/// Per-run totals over all splits of one (agent, gpu), then mean/std over
/// runs. Every run must cover the same set of splits.
inline AgentResult summarize_agent(std::span<const RunRecord> records, double avg_ssr) {
  if (records.empty()) throw InvalidValue("summarize_agent: no records");
  const auto& agent = records.front().agent;
  const auto& gpu = records.front().gpu;
  std::map<int, std::pair<double, double>> per_run;  // run -> (Wh, s)
  std::map<int, std::set<std::string>> splits;
  for (const auto& r : records) {
    if (r.agent != agent || r.gpu != gpu) throw InvalidValue("summarize_agent: mixed agent/gpu records");
    auto& acc = per_run[r.run_index];
    acc.first += r.energy.value();
    acc.second += r.duration.value();
    splits[r.run_index].insert(r.split);
  }
  const auto& expected = splits.begin()->second;
  for (const auto& [idx, s] : splits) {
    if (s != expected) {
      throw InvalidValue("summarize_agent: run " + std::to_string(idx) + " of " + agent + "/" + gpu +
                         " covers a different set of splits");
    }
  }
  std::vector<double> kwh, minutes;
  for (const auto& [idx, acc] : per_run) {
    kwh.push_back(acc.first / 1000.0);
    minutes.push_back(acc.second / 60.0);
  }
  if (avg_ssr < 0 || avg_ssr > 100) throw InvalidValue("avg_ssr must be within [0, 100]");
  return {agent, gpu, avg_ssr, aggregate(kwh), aggregate(minutes)};
}

/// Agents ranked by descending SSR; equal SSR ranks lower energy first.
inline ReportTable build_efficiency_table(std::vector<AgentResult> results) {
  std::set<std::string> agents;
  for (const auto& r : results) {
    if (!agents.insert(r.agent).second) throw InvalidValue("efficiency table: duplicate agent '" + r.agent + "'");
    if (r.gpu != results.front().gpu) throw InvalidValue("efficiency table: results span several GPUs");
  }
  std::stable_sort(results.begin(), results.end(), [](const AgentResult& a, const AgentResult& b) {
    if (a.avg_ssr != b.avg_ssr) return a.avg_ssr > b.avg_ssr;
    return a.energy_kwh.mean < b.energy_kwh.mean;
  });
  ReportTable t;
  t.title = "Energy, time and average step success rate" +
            (results.empty() ? std::string{} : " on " + results.front().gpu);
  t.columns = {{"Agent", ""}, {"Ø SSR", "%"}, {"Energy", "kWh"}, {"Time", "min"}};
  for (const auto& r : results) {
    t.add_row({r.agent, fmt::fixed(r.avg_ssr, 2), fmt::fixed_uncertainty(r.energy_kwh.mean, r.energy_kwh.std, 2),
               fmt::fixed_uncertainty(r.time_min.mean, r.time_min.std, 1)});
  }
  return t;
}

/// Agent x GPU energy and completion-time table.
inline ReportTable build_energy_time_table(const std::vector<AgentResult>& results) {
  ReportTable t;
  t.title = "Energy and completion time per agent and GPU";
  t.columns = {{"Agent", ""}, {"GPU", ""}, {"Energy", "kWh"}, {"Time", "min"}};
  for (const auto& r : results) {
    t.add_row({r.agent, r.gpu, fmt::fixed_uncertainty(r.energy_kwh.mean, r.energy_kwh.std, 2),
               fmt::fixed_uncertainty(r.time_min.mean, r.time_min.std, 1)});
  }
  return t;
}

struct SplitEnergy {
  std::string agent;
  std::string gpu;
  std::string split;
  AggregateStat energy_wh;
  TokenCount tokens;
  EnergyPerTokenWh per_token;
};

/// Groups runs by (agent, gpu, split) and divides by the benchmark's token
/// totals. Agents missing from a split's token totals are rejected.
inline std::vector<SplitEnergy> split_energies(std::span<const RunRecord> records, const BenchmarkSpec& bench) {
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<RunRecord>> groups;
  for (const auto& r : records) groups[{r.agent, r.gpu, r.split}].push_back(r);
  std::vector<SplitEnergy> out;
  for (const auto& [key, runs] : groups) {
    const auto& [agent, gpu, split] = key;
    const auto* s = bench.find_split(split);
    if (!s) throw NotFound("benchmark '" + bench.name + "' has no split '" + split + "'");
    auto it = s->token_totals.find(agent);
    if (it == s->token_totals.end()) {
      throw NotFound("no token total for agent '" + agent + "' in split '" + split + "'");
    }
    const auto stat = aggregate_runs(runs);
    out.push_back({agent, gpu, split, stat, it->second, energy_per_token(stat, it->second)});
  }
  return out;
}

/// Split energy and energy per token; spreads in kWh and kWh/token.
inline ReportTable build_energy_per_token_table(const std::vector<SplitEnergy>& rows, bool with_gpu) {
  ReportTable t;
  t.title = "Energy per benchmark split and energy per input token";
  if (with_gpu) t.columns = {{"Agent", ""}, {"GPU", ""}, {"Split", ""}};
  else t.columns = {{"Agent", ""}, {"Split", ""}};
  t.columns.insert(t.columns.end(), {{"# 10⁶ Tokens", ""}, {"Energy", "kWh"}, {"Energy/Token", "kWh"}});
  for (const auto& r : rows) {
    std::vector<std::string> cells{r.agent};
    if (with_gpu) cells.push_back(r.gpu);
    cells.push_back(r.split);
    cells.push_back(fmt::fixed(static_cast<double>(r.tokens.value()) / 1e6, 2));
    cells.push_back(fmt::fixed_uncertainty(r.energy_wh.mean / 1000.0, r.energy_wh.std / 1000.0, 3));
    cells.push_back(fmt::uncertainty(r.per_token.mean / 1000.0, r.per_token.std / 1000.0, 3));
    t.add_row(std::move(cells));
  }
  t.footnotes.push_back("Spread is the sample (n-1) standard deviation over repeated runs; token totals are exact.");
  return t;
}

}  // namespace wattbench
