#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "wattbench/error.hpp"

namespace wattbench {

enum class EnergyUnit { Ws, Wh, kWh };
enum class PowerUnit { W, kW };
enum class TimeUnit { s, min, h };

namespace detail {

// value_in_canonical = value * mul / div
struct Scale {
  double mul;
  double div;
};

struct EnergyDim {
  using unit = EnergyUnit;
  static constexpr const char* name = "energy";
  static constexpr Scale scale(EnergyUnit u) {
    switch (u) {
      case EnergyUnit::Ws: return {1.0, 3600.0};
      case EnergyUnit::Wh: return {1.0, 1.0};
      case EnergyUnit::kWh: return {1000.0, 1.0};
    }
    return {1.0, 1.0};
  }
};

struct PowerDim {
  using unit = PowerUnit;
  static constexpr const char* name = "power";
  static constexpr Scale scale(PowerUnit u) {
    return u == PowerUnit::kW ? Scale{1000.0, 1.0} : Scale{1.0, 1.0};
  }
};

struct TimeDim {
  using unit = TimeUnit;
  static constexpr const char* name = "duration";
  static constexpr Scale scale(TimeUnit u) {
    switch (u) {
      case TimeUnit::s: return {1.0, 1.0};
      case TimeUnit::min: return {60.0, 1.0};
      case TimeUnit::h: return {3600.0, 1.0};
    }
    return {1.0, 1.0};
  }
};

}  // namespace detail

/// Non-negative scalar stored in the dimension's canonical unit (Wh, W, s).
/// Only same-dimension arithmetic is defined.
template <typename Dim>
class Quantity {
 public:
  using unit_type = typename Dim::unit;

  constexpr Quantity() = default;
  explicit Quantity(double canonical) : value_(checked(canonical)) {}

  static Quantity from(double v, unit_type u) {
    const auto s = Dim::scale(u);
    return Quantity(v * s.mul / s.div);
  }

  double value() const noexcept { return value_; }

  double in(unit_type u) const noexcept {
    const auto s = Dim::scale(u);
    return value_ * s.div / s.mul;
  }

  friend Quantity operator+(Quantity a, Quantity b) { return Quantity(a.value_ + b.value_); }
  friend Quantity operator-(Quantity a, Quantity b) { return Quantity(a.value_ - b.value_); }
  friend Quantity operator*(Quantity a, double k) { return Quantity(a.value_ * k); }
  friend Quantity operator*(double k, Quantity a) { return Quantity(a.value_ * k); }
  friend Quantity operator/(Quantity a, double k) { return Quantity(a.value_ / k); }
  friend double operator/(Quantity a, Quantity b) { return a.value_ / b.value_; }

  Quantity& operator+=(Quantity o) { return *this = *this + o; }

  friend auto operator<=>(Quantity, Quantity) = default;
  friend bool operator==(Quantity, Quantity) = default;

 private:
  static double checked(double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidValue(std::string(Dim::name) + " must be finite and non-negative, got " +
                         std::to_string(v));
    }
    return v;
  }

  double value_ = 0.0;
};

using EnergyWh = Quantity<detail::EnergyDim>;
using PowerW = Quantity<detail::PowerDim>;
using DurationS = Quantity<detail::TimeDim>;

inline EnergyWh operator*(PowerW p, DurationS t) {
  return EnergyWh::from(p.value() * t.value(), EnergyUnit::Ws);
}
inline EnergyWh operator*(DurationS t, PowerW p) { return p * t; }

/// Exact non-negative integer count.
class TokenCount {
 public:
  constexpr TokenCount() = default;
  constexpr explicit TokenCount(std::uint64_t v) : value_(v) {}

  /// Rejects negative or non-integral input instead of rounding it.
  static TokenCount from_signed(std::int64_t v) {
    if (v < 0) throw InvalidValue("token count must be non-negative, got " + std::to_string(v));
    return TokenCount(static_cast<std::uint64_t>(v));
  }

  constexpr std::uint64_t value() const noexcept { return value_; }

  friend TokenCount operator+(TokenCount a, TokenCount b) {
    std::uint64_t out = 0;
    if (__builtin_add_overflow(a.value_, b.value_, &out)) throw InvalidValue("token count overflow");
    return TokenCount(out);
  }
  friend TokenCount operator*(TokenCount a, std::uint64_t k) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a.value_, k, &out)) throw InvalidValue("token count overflow");
    return TokenCount(out);
  }
  TokenCount& operator+=(TokenCount o) { return *this = *this + o; }

  friend constexpr auto operator<=>(TokenCount, TokenCount) = default;

 private:
  std::uint64_t value_ = 0;
};

struct EnergyPerTokenWh {
  double mean = 0.0;  // Wh/token
  double std = 0.0;   // Wh/token
};

/// Integer grams of CO2-equivalent.
class GramsCO2e {
 public:
  constexpr GramsCO2e() = default;
  explicit GramsCO2e(std::int64_t g) : value_(g) {
    if (g < 0) throw InvalidValue("CO2 mass must be non-negative, got " + std::to_string(g));
  }

  constexpr std::int64_t value() const noexcept { return value_; }

  friend constexpr auto operator<=>(GramsCO2e, GramsCO2e) = default;

 private:
  std::int64_t value_ = 0;
};

namespace detail {

struct UnitInfo {
  char dim;  // 'E', 'P', 'T'
  Scale scale;
};

inline bool lookup_unit(std::string_view u, UnitInfo& out) {
  if (u == "Ws" || u == "J") out = {'E', EnergyDim::scale(EnergyUnit::Ws)};
  else if (u == "Wh") out = {'E', EnergyDim::scale(EnergyUnit::Wh)};
  else if (u == "kWh") out = {'E', EnergyDim::scale(EnergyUnit::kWh)};
  else if (u == "W") out = {'P', PowerDim::scale(PowerUnit::W)};
  else if (u == "kW") out = {'P', PowerDim::scale(PowerUnit::kW)};
  else if (u == "s") out = {'T', TimeDim::scale(TimeUnit::s)};
  else if (u == "min") out = {'T', TimeDim::scale(TimeUnit::min)};
  else if (u == "h") out = {'T', TimeDim::scale(TimeUnit::h)};
  else return false;
  return true;
}

}  // namespace detail

/// Runtime conversion between unit names ("Ws", "J", "Wh", "kWh", "W", "kW",
/// "s", "min", "h"). Throws InvalidValue on unknown units or mismatched
/// dimensions.
inline double convert(double value, std::string_view from, std::string_view to) {
  detail::UnitInfo a{}, b{};
  if (!detail::lookup_unit(from, a)) throw InvalidValue("unknown unit '" + std::string(from) + "'");
  if (!detail::lookup_unit(to, b)) throw InvalidValue("unknown unit '" + std::string(to) + "'");
  if (a.dim != b.dim) {
    throw InvalidValue("cannot convert " + std::string(from) + " to " + std::string(to) +
                       ": dimensions differ");
  }
  const double canonical = value * a.scale.mul / a.scale.div;
  return canonical * b.scale.div / b.scale.mul;
}

}  // namespace wattbench
