#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "wattbench/error.hpp"

namespace wattbench::json_util {

using nlohmann::json;

inline std::string read_file(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + std::string(what) + " '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline json parse(std::string_view text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, e.what());
  }
}

inline std::string join(const std::string& parent, std::string_view key) {
  return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

inline std::string index(const std::string& parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

inline void require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw SchemaError(field.empty() ? "<root>" : field, "expected object");
}

inline void require_array(const json& j, const std::string& field) {
  if (!j.is_array()) throw SchemaError(field, "expected array");
}

/// Rejects keys outside `allowed`.
inline void only_keys(const json& obj, const std::string& field,
                      std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw SchemaError(join(field, key), "unknown field");
  }
}

inline const json& member(const json& obj, const std::string& parent, std::string_view key) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw SchemaError(join(parent, key), "missing required field");
  return *it;
}

inline std::string string_field(const json& obj, const std::string& parent, std::string_view key) {
  const auto& v = member(obj, parent, key);
  if (!v.is_string()) throw SchemaError(join(parent, key), "expected string");
  return v.get<std::string>();
}

inline double number_field(const json& obj, const std::string& parent, std::string_view key) {
  const auto& v = member(obj, parent, key);
  if (!v.is_number()) throw SchemaError(join(parent, key), "expected number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(join(parent, key), "expected finite number");
  return d;
}

inline double positive_field(const json& obj, const std::string& parent, std::string_view key) {
  const double d = number_field(obj, parent, key);
  if (!(d > 0)) throw SchemaError(join(parent, key), "expected positive number");
  return d;
}

/// Integer-valued JSON number (1e9 style accepted when integral).
inline std::int64_t integer_value(const json& v, const std::string& field) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && std::floor(d) == d && std::abs(d) < 9.0e18) {
      return static_cast<std::int64_t>(d);
    }
  }
  throw SchemaError(field, "expected integer");
}

inline std::int64_t integer_field(const json& obj, const std::string& parent, std::string_view key) {
  return integer_value(member(obj, parent, key), join(parent, key));
}

}  // namespace wattbench::json_util
