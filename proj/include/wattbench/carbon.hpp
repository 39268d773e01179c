#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wattbench/catalog.hpp"
#include "wattbench/error.hpp"
#include "wattbench/format.hpp"
#include "wattbench/quantities.hpp"
#include "wattbench/report.hpp"

namespace wattbench {

enum class Co2Rounding { floor, nearest };

inline Co2Rounding parse_co2_rounding(std::string_view s) {
  if (s == "floor") return Co2Rounding::floor;
  if (s == "nearest") return Co2Rounding::nearest;
  throw InvalidValue("unknown CO2 rounding '" + std::string(s) + "' (expected floor or nearest)");
}

/// Energy (kWh) x grid intensity (g/kWh), rounded to whole grams. Floor
/// tolerates a 1e-9 relative representation error, so a product that is
/// integral in decimal never drops a gram.
inline GramsCO2e co2_grams(EnergyWh energy, const EmissionFactor& factor, Co2Rounding rounding = Co2Rounding::floor) {
  const double g = energy.value() * factor.g_per_kwh / 1000.0;
  if (rounding == Co2Rounding::nearest) return GramsCO2e(std::llround(g));
  return GramsCO2e(static_cast<std::int64_t>(std::floor(g + g * 1e-9)));
}

struct EquivalenceSpec {
  double car_g_per_km = 248.55;
};

inline double car_distance_km(GramsCO2e grams, const EquivalenceSpec& eq = {}) {
  if (!(eq.car_g_per_km > 0) || !std::isfinite(eq.car_g_per_km)) throw InvalidValue("car_g_per_km must be positive");
  return static_cast<double>(grams.value()) / eq.car_g_per_km;
}

/// One decimal below 10 km, whole kilometres from 10 km on.
inline double round_car_distance(double km) {
  return km < 10.0 ? std::round(km * 10.0) / 10.0 : std::round(km);
}

inline std::string format_car_distance(double km) {
  return km < 10.0 ? fmt::fixed(km, 1) : fmt::fixed(km, 0);
}

struct CarbonResult {
  EnergyWh energy;
  std::string region;
  GramsCO2e grams;
  double car_km = 0.0;
};

inline CarbonResult carbon_result(EnergyWh energy, const EmissionFactor& factor, Co2Rounding rounding = Co2Rounding::floor,
                                  const EquivalenceSpec& eq = {}) {
  const auto g = co2_grams(energy, factor, rounding);
  return {energy, factor.region, g, car_distance_km(g, eq)};
}

struct CarbonEntry {
  std::string method;  // e.g. "Benchmarking", "Estimation"
  std::string agent;
  std::optional<std::string> gpu;
  EnergyWh energy;
};

/// One row per entry, one gCO2e column per region. The method label appears
/// on the first row of each consecutive group only.
inline ReportTable carbon_table(const std::vector<CarbonEntry>& entries, const std::vector<EmissionFactor>& factors,
                                Co2Rounding rounding = Co2Rounding::floor) {
  if (entries.empty()) throw InvalidValue("carbon table: no entries");
  if (factors.empty()) throw InvalidValue("carbon table: no emission factors");
  bool with_gpu = false;
  for (const auto& e : entries) with_gpu = with_gpu || e.gpu.has_value();
  ReportTable t;
  t.title = "CO2 emissions per agent";
  t.columns = {{"Method", ""}, {"Agent", ""}};
  if (with_gpu) t.columns.push_back({"GPU", ""});
  t.columns.push_back({"Energy", "kWh"});
  for (const auto& f : factors) t.columns.push_back({f.region, "gCO2e"});
  std::string last_method;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    std::vector<std::string> cells{i == 0 || e.method != last_method ? e.method : "", e.agent};
    last_method = e.method;
    if (with_gpu) cells.push_back(e.gpu.value_or(""));
    cells.push_back(fmt::fixed(e.energy.in(EnergyUnit::kWh), 2));
    for (const auto& f : factors) cells.push_back(std::to_string(co2_grams(e.energy, f, rounding).value()));
    t.add_row(std::move(cells));
  }
  t.footnotes.push_back(std::string("Grams are ") + (rounding == Co2Rounding::floor ? "truncated" : "rounded") +
                        " to whole grams; factors in g/kWh:" + [&] {
                          std::string s;
                          for (const auto& f : factors) s += " " + f.region + " " + fmt::compact(f.g_per_kwh);
                          return s;
                        }() + ".");
  return t;
}

}  // namespace wattbench
