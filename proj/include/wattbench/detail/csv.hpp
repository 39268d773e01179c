#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "wattbench/error.hpp"

// Minimal RFC-4180 reader/writer for the toolkit's small tabular inputs.
namespace wattbench::csv {

struct Record {
  std::size_t line = 0;  // physical line the record starts on
  std::vector<std::string> fields;
};

struct Document {
  std::string source;
  Record header;
  std::vector<Record> rows;

  /// Index of `name` in the header; throws ParseError if absent.
  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
      if (header.fields[i] == name) return i;
    }
    throw ParseError(source, header.line, "missing column '" + std::string(name) + "'");
  }

  bool has_column(std::string_view name) const {
    for (const auto& f : header.fields) {
      if (f == name) return true;
    }
    return false;
  }
};

inline Document parse(std::string_view text, std::string source) {
  Document doc;
  doc.source = std::move(source);
  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool record_has_content = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    // blank lines are skipped
    if (record_has_content || current.fields.size() > 1 || !current.fields.front().empty()) {
      records.push_back(std::move(current));
    }
    current = Record{};
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_quoted) {
          throw ParseError(doc.source, line, "unexpected quote inside unquoted field");
        }
        in_quotes = true;
        field_quoted = true;
        record_has_content = true;
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        throw ParseError(doc.source, line, "bare carriage return");
      case '\n':
        end_record();
        ++line;
        current.line = line;
        break;
      default:
        if (field_quoted) throw ParseError(doc.source, line, "text after closing quote");
        field.push_back(c);
        record_has_content = true;
    }
  }
  if (in_quotes) throw ParseError(doc.source, line, "unterminated quoted field");
  if (record_has_content || !field.empty()) end_record();

  if (records.empty()) throw ParseError(doc.source, 1, "missing header");
  doc.header = std::move(records.front());
  const auto width = doc.header.fields.size();
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].fields.size() != width) {
      throw ParseError(doc.source, records[i].line,
                       "expected " + std::to_string(width) + " fields, got " +
                           std::to_string(records[i].fields.size()));
    }
    doc.rows.push_back(std::move(records[i]));
  }
  return doc;
}

inline Document read(std::istream& in, std::string source) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError("failed reading " + source);
  return parse(text, std::move(source));
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

/// Locale-independent strict decimal parse; the whole field must be consumed.
inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> to_int(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline double field_double(const Document& doc, const Record& r, std::size_t col) {
  auto v = to_double(r.fields[col]);
  if (!v) {
    throw ParseError(doc.source, r.line,
                     "column '" + doc.header.fields[col] + "': not a number: '" + r.fields[col] + "'");
  }
  return *v;
}

inline std::int64_t field_int(const Document& doc, const Record& r, std::size_t col) {
  auto v = to_int(r.fields[col]);
  if (!v) {
    throw ParseError(doc.source, r.line,
                     "column '" + doc.header.fields[col] + "': not an integer: '" + r.fields[col] + "'");
  }
  return *v;
}

inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace wattbench::csv
