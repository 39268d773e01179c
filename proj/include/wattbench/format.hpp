#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <string>

// Locale-independent number formatting used by every table.
namespace wattbench::fmt {

/// Fixed-point with `decimals` digits after the point.
inline std::string fixed(double x, int decimals) {
  if (decimals < 0) decimals = 0;
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) return "nan";
  std::string s(buf.data(), ptr);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);  // no "-0.00"
  return s;
}

/// Decimals needed to show `x` with `sig` significant figures (never negative).
inline int sig_decimals(double x, int sig) {
  if (x == 0.0 || !std::isfinite(x)) return sig - 1 > 0 ? sig - 1 : 0;
  int e = static_cast<int>(std::floor(std::log10(std::abs(x))));
  int d = sig - 1 - e;
  // rounding can carry into the next decade (9.96 -> 10.0)
  const double scale = std::pow(10.0, d);
  const double rounded = std::round(std::abs(x) * scale) / scale;
  if (rounded >= std::pow(10.0, e + 1)) d -= 1;
  return d > 0 ? d : 0;
}

/// `sig` significant figures, trailing zeros kept ("2.0").
inline std::string sig(double x, int sig_figs) {
  const int d = sig_decimals(x, sig_figs);
  if (d == 0 && x != 0.0 && std::isfinite(x)) {
    const int e = static_cast<int>(std::floor(std::log10(std::abs(x))));
    if (e + 1 > sig_figs) {
      const double q = std::pow(10.0, e + 1 - sig_figs);
      return fixed(std::round(x / q) * q, 0);
    }
  }
  return fixed(x, d);
}

/// Drops trailing fractional zeros ("0.010" -> "0.01", "3.0" -> "3").
inline std::string strip_zeros(std::string s) {
  if (s.find('.') == std::string::npos) return s;
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

inline std::string superscript(int n) {
  static const char* digits[] = {"⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"};
  std::string out = n < 0 ? "⁻" : "";
  const std::string plain = std::to_string(n < 0 ? -n : n);
  for (char c : plain) out += digits[c - '0'];
  return out;
}

/// "m ± s" with the mean at `sig_figs` significant figures and the spread at
/// the same number of significant figures without trailing zeros. A zero
/// spread prints the mean only. Magnitudes below 1e-6 switch to grouped
/// engineering notation: "(86.7 ± 1.11) × 10⁻⁹".
inline std::string uncertainty(double mean, double std, int sig_figs) {
  if (sig_figs < 1) sig_figs = 1;
  int exponent = 0;
  if (mean != 0.0 && std::abs(mean) < 1e-3) {
    const int e = static_cast<int>(std::floor(std::log10(std::abs(mean))));
    exponent = e >= 0 ? (e / 3) * 3 : -(((-e) + 2) / 3) * 3;
    const double scale = std::pow(10.0, -exponent);
    mean *= scale;
    std *= scale;
  }
  std::string body = sig(mean, sig_figs);
  if (std > 0.0) body += " ± " + strip_zeros(sig(std, sig_figs));
  if (exponent == 0) return body;
  const std::string tail = " × 10" + superscript(exponent);
  return (std > 0.0 ? "(" + body + ")" : body) + tail;
}

/// "m ± s" with both at a fixed number of decimals ("0.33 ± 0.01").
inline std::string fixed_uncertainty(double mean, double std, int decimals) {
  std::string out = fixed(mean, decimals);
  if (std > 0.0) out += " ± " + fixed(std, decimals);
  return out;
}

/// Scientific with `sig_figs` significant figures and a bare exponent
/// ("4.44e11", "2.22e-4").
inline std::string sci(double x, int sig_figs) {
  if (sig_figs < 1) sig_figs = 1;
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::scientific, sig_figs - 1);
  if (ec != std::errc{}) return "nan";
  std::string s(buf.data(), ptr);
  const auto e = s.find('e');
  std::string mant = s.substr(0, e), exp = s.substr(e + 1);
  const bool neg = exp.front() == '-';
  exp.erase(0, exp.find_first_not_of("+-"));
  exp.erase(0, std::min(exp.find_first_not_of('0'), exp.size() - 1));
  if (exp == "0") return mant;
  return mant + "e" + (neg ? "-" : "") + exp;
}

/// Shortest of up to `max_decimals` decimals ("0.33", "99.21", "1").
inline std::string compact(double x, int max_decimals = 3) { return strip_zeros(fixed(x, max_decimals)); }

}  // namespace wattbench::fmt
