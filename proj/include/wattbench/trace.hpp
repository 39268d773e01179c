#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wattbench/detail/csv.hpp"
#include "wattbench/detail/sum.hpp"
#include "wattbench/error.hpp"
#include "wattbench/quantities.hpp"

namespace wattbench {

struct PowerSample {
  DurationS t;  // offset from trace start
  PowerW p;
};

/// Power samples of one device over one run, timestamps non-decreasing.
class PowerTrace {
 public:
  PowerTrace() = default;
  PowerTrace(std::string device_id, std::vector<PowerSample> samples)
      : device_id_(std::move(device_id)), samples_(std::move(samples)) {
    for (std::size_t i = 1; i < samples_.size(); ++i) {
      if (samples_[i].t < samples_[i - 1].t) {
        throw InvalidValue("trace '" + device_id_ + "': timestamp decreases at sample " +
                           std::to_string(i));
      }
    }
  }

  const std::string& device_id() const noexcept { return device_id_; }
  const std::vector<PowerSample>& samples() const noexcept { return samples_; }
  bool empty() const noexcept { return samples_.empty(); }

  DurationS span() const {
    if (samples_.size() < 2) return DurationS{};
    return samples_.back().t - samples_.front().t;
  }

 private:
  std::string device_id_;
  std::vector<PowerSample> samples_;
};

/// One trace per device for a single run.
class TraceBundle {
 public:
  TraceBundle() = default;
  TraceBundle(std::string run_id, std::vector<PowerTrace> traces)
      : run_id_(std::move(run_id)), traces_(std::move(traces)) {
    std::set<std::string> seen;
    for (const auto& t : traces_) {
      if (!seen.insert(t.device_id()).second) {
        throw InvalidValue("bundle '" + run_id_ + "': duplicate device '" + t.device_id() + "'");
      }
    }
  }

  const std::string& run_id() const noexcept { return run_id_; }
  const std::vector<PowerTrace>& traces() const noexcept { return traces_; }

 private:
  std::string run_id_;
  std::vector<PowerTrace> traces_;
};

/// Parses the `t_s,power_w` CSV schema. Errors carry the offending line.
inline PowerTrace parse_trace(std::string_view text, std::string device_id,
                              const std::string& source = "<trace>") {
  const auto doc = csv::parse(text, source);
  if (doc.header.fields.size() != 2 || csv::trim(doc.header.fields[0]) != "t_s" ||
      csv::trim(doc.header.fields[1]) != "power_w") {
    throw ParseError(source, doc.header.line, "expected header 't_s,power_w'");
  }
  std::vector<PowerSample> samples;
  samples.reserve(doc.rows.size());
  for (const auto& row : doc.rows) {
    const double t = csv::field_double(doc, row, 0);
    const double p = csv::field_double(doc, row, 1);
    if (!(t >= 0.0) || !std::isfinite(t)) throw ParseError(source, row.line, "negative or non-finite timestamp");
    if (!(p >= 0.0) || !std::isfinite(p)) throw ParseError(source, row.line, "negative or non-finite power");
    if (!samples.empty() && t < samples.back().t.value()) {
      throw ParseError(source, row.line, "timestamp decreases");
    }
    samples.push_back({DurationS(t), PowerW(p)});
  }
  return PowerTrace(std::move(device_id), std::move(samples));
}

inline PowerTrace parse_trace(std::istream& in, std::string device_id,
                              const std::string& source = "<trace>") {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str(), std::move(device_id), source);
}

inline PowerTrace load_trace(const std::filesystem::path& path, std::string device_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file '" + path.string() + "'");
  return parse_trace(in, std::move(device_id), path.string());
}

/// Trapezoidal integral of power over time. Fewer than two samples give 0 Wh.
inline EnergyWh integrate_trace(const PowerTrace& trace) {
  const auto& s = trace.samples();
  detail::CompensatedSum ws;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double dt = s[i].t.value() - s[i - 1].t.value();
    ws.add(0.5 * dt * (s[i].p.value() + s[i - 1].p.value()));
  }
  return EnergyWh::from(ws.value(), EnergyUnit::Ws);
}

struct GapWarning {
  std::size_t index = 0;   // sample that ends the long interval
  double interval_s = 0.0;
  double median_s = 0.0;
};

/// Intervals longer than `factor` times the median positive interval.
inline std::vector<GapWarning> find_gaps(const PowerTrace& trace, double factor = 10.0) {
  const auto& s = trace.samples();
  std::vector<double> positive;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double dt = s[i].t.value() - s[i - 1].t.value();
    if (dt > 0) positive.push_back(dt);
  }
  if (positive.empty()) return {};
  std::vector<double> sorted = positive;
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  std::vector<GapWarning> out;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double dt = s[i].t.value() - s[i - 1].t.value();
    if (dt > factor * median) out.push_back({i, dt, median});
  }
  return out;
}

inline EnergyWh bundle_energy(const TraceBundle& bundle) {
  EnergyWh total;
  for (const auto& t : bundle.traces()) total += integrate_trace(t);
  return total;
}

struct TraceRef {
  std::string device_id;
  std::filesystem::path path;  // resolved against the manifest directory
};

/// `{run_id, traces:[{device_id, path}]}` plus optional run metadata.
struct BundleManifest {
  std::string run_id;
  std::string agent;
  std::string gpu = "unknown";
  std::string split = "all";
  int run_index = 1;
  std::vector<TraceRef> traces;
};

inline BundleManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                                     const std::string& source = "<manifest>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, e.what());
  }
  if (!j.is_object()) throw SchemaError(source, "manifest must be a JSON object");
  auto str = [&](const nlohmann::json& obj, const char* key, const std::string& field) -> std::string {
    if (!obj.contains(key) || !obj[key].is_string()) throw SchemaError(field, "expected string");
    return obj[key].get<std::string>();
  };

  BundleManifest m;
  m.run_id = str(j, "run_id", "run_id");
  m.agent = j.contains("agent") ? str(j, "agent", "agent") : m.run_id;
  if (j.contains("gpu")) m.gpu = str(j, "gpu", "gpu");
  if (j.contains("split")) m.split = str(j, "split", "split");
  if (j.contains("run_index")) {
    if (!j["run_index"].is_number_integer()) throw SchemaError("run_index", "expected integer");
    m.run_index = j["run_index"].get<int>();
  }
  if (!j.contains("traces") || !j["traces"].is_array()) throw SchemaError("traces", "expected array");
  for (std::size_t i = 0; i < j["traces"].size(); ++i) {
    const auto& t = j["traces"][i];
    const std::string field = "traces[" + std::to_string(i) + "]";
    if (!t.is_object()) throw SchemaError(field, "expected object");
    std::filesystem::path p = str(t, "path", field + ".path");
    if (p.is_relative()) p = base_dir / p;
    m.traces.push_back({str(t, "device_id", field + ".device_id"), p});
  }
  return m;
}

inline BundleManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path(), path.string());
}

inline TraceBundle load_bundle(const BundleManifest& m) {
  std::vector<PowerTrace> traces;
  for (const auto& ref : m.traces) traces.push_back(load_trace(ref.path, ref.device_id));
  return TraceBundle(m.run_id, std::move(traces));
}

}  // namespace wattbench
