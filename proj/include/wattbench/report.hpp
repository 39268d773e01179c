#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wattbench/detail/csv.hpp"
#include "wattbench/detail/json_util.hpp"
#include "wattbench/error.hpp"
#include "wattbench/format.hpp"

namespace wattbench {

struct Column {
  std::string name;
  std::string unit;  // may be empty

  std::string label() const { return unit.empty() ? name : name + " (" + unit + ")"; }
  friend bool operator==(const Column&, const Column&) = default;
};

struct ReportTable {
  std::string title;
  std::vector<Column> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footnotes;

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size()) {
      throw InvalidValue("table '" + title + "': row has " + std::to_string(cells.size()) +
                         " cells, expected " + std::to_string(columns.size()));
    }
    rows.push_back(std::move(cells));
  }

  void validate() const {
    for (const auto& r : rows) {
      if (r.size() != columns.size()) {
        throw InvalidValue("table '" + title + "': row width " + std::to_string(r.size()) +
                           " != column count " + std::to_string(columns.size()));
      }
    }
  }

  friend bool operator==(const ReportTable&, const ReportTable&) = default;
};

enum class Format { markdown, csv, json };

inline Format parse_format(std::string_view s) {
  if (s == "markdown" || s == "md") return Format::markdown;
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw InvalidValue("unknown output format '" + std::string(s) + "' (expected markdown, csv or json)");
}

namespace detail {

inline std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

inline std::string render_markdown(const ReportTable& t) {
  std::string out;
  if (!t.title.empty()) out += "### " + t.title + "\n\n";
  out += "|";
  for (const auto& c : t.columns) out += " " + md_cell(c.label()) + " |";
  out += "\n|";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& r : t.rows) {
    out += "|";
    for (const auto& cell : r) out += " " + md_cell(cell) + " |";
    out += "\n";
  }
  if (!t.footnotes.empty()) {
    out += "\n";
    for (const auto& f : t.footnotes) out += "- " + f + "\n";
  }
  return out;
}

inline std::string render_csv(const ReportTable& t) {
  auto line = [](const auto& cells, auto get) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ",";
      s += csv::escape(get(cells[i]));
    }
    return s + "\n";
  };
  std::string out = line(t.columns, [](const Column& c) { return c.label(); });
  for (const auto& r : t.rows) out += line(r, [](const std::string& s) { return s; });
  return out;
}

inline nlohmann::ordered_json to_json(const ReportTable& t) {
  nlohmann::ordered_json j;
  j["title"] = t.title;
  j["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : t.columns) j["columns"].push_back({{"name", c.name}, {"unit", c.unit}});
  j["rows"] = t.rows;
  j["footnotes"] = t.footnotes;
  return j;
}

}  // namespace detail

/// Byte-deterministic rendering. CSV carries the header and data rows only.
inline std::string render(const ReportTable& table, Format format) {
  table.validate();
  switch (format) {
    case Format::markdown: return detail::render_markdown(table);
    case Format::csv: return detail::render_csv(table);
    case Format::json: return detail::to_json(table).dump(2) + "\n";
  }
  throw InvalidValue("unknown output format");
}

/// Several tables in one stream: markdown/csv separated by a blank line, JSON
/// as an array.
inline std::string render(const std::vector<ReportTable>& tables, Format format) {
  if (format == Format::json) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& t : tables) {
      t.validate();
      arr.push_back(detail::to_json(t));
    }
    return arr.dump(2) + "\n";
  }
  std::string out;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (i) out += "\n";
    out += render(tables[i], format);
  }
  return out;
}

inline ReportTable parse_table_json(std::string_view text) {
  const auto j = json_util::parse(text, "<table>");
  json_util::require_object(j, "");
  json_util::only_keys(j, "", {"title", "columns", "rows", "footnotes"});
  ReportTable t;
  t.title = json_util::string_field(j, "", "title");
  const auto& cols = json_util::member(j, "", "columns");
  json_util::require_array(cols, "columns");
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const auto f = json_util::index("columns", i);
    json_util::require_object(cols[i], f);
    t.columns.push_back({json_util::string_field(cols[i], f, "name"), json_util::string_field(cols[i], f, "unit")});
  }
  const auto& rows = json_util::member(j, "", "rows");
  json_util::require_array(rows, "rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    json_util::require_array(rows[i], json_util::index("rows", i));
    std::vector<std::string> cells;
    for (const auto& c : rows[i]) {
      if (!c.is_string()) throw SchemaError(json_util::index("rows", i), "cells must be strings");
      cells.push_back(c.get<std::string>());
    }
    t.add_row(std::move(cells));
  }
  const auto& notes = json_util::member(j, "", "footnotes");
  json_util::require_array(notes, "footnotes");
  for (const auto& n : notes) {
    if (!n.is_string()) throw SchemaError("footnotes", "expected strings");
    t.footnotes.push_back(n.get<std::string>());
  }
  return t;
}

/// Table-cell form of a mean ± spread (see fmt::uncertainty).
inline std::string format_uncertainty(double mean, double std, int sig) {
  return fmt::uncertainty(mean, std, sig);
}

}  // namespace wattbench
