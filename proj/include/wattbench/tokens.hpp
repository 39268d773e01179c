#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wattbench/detail/json_util.hpp"
#include "wattbench/error.hpp"
#include "wattbench/quantities.hpp"

namespace wattbench {

struct DocumentCount {
  std::string doc_id;
  TokenCount token_count;
};

/// Token-count interchange file written by the tokenizer bridge.
struct TokenCountFile {
  std::string tokenizer_id;
  std::optional<std::string> tokenizer_version;
  std::vector<DocumentCount> documents;
  TokenCount total;
  std::vector<std::string> skipped;  // documents the bridge could not read
};

/// Strict parse: unknown keys, negative counts and a total that does not
/// equal the sum of document counts are rejected.
inline TokenCountFile parse_token_counts(std::string_view text, const std::string& source = "<token counts>") {
  using json_util::json;
  const auto root = json_util::parse(text, source);
  json_util::require_object(root, "");
  json_util::only_keys(root, "", {"tokenizer_id", "tokenizer_version", "documents", "total", "skipped", "provenance"});

  TokenCountFile f;
  f.tokenizer_id = json_util::string_field(root, "", "tokenizer_id");
  if (root.contains("tokenizer_version")) f.tokenizer_version = json_util::string_field(root, "", "tokenizer_version");
  if (root.contains("provenance")) json_util::string_field(root, "", "provenance");

  const auto& docs = json_util::member(root, "", "documents");
  json_util::require_array(docs, "documents");
  TokenCount sum;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto field = json_util::index("documents", i);
    json_util::require_object(docs[i], field);
    json_util::only_keys(docs[i], field, {"doc_id", "token_count"});
    const auto n = json_util::integer_field(docs[i], field, "token_count");
    if (n < 0) throw SchemaError(field + ".token_count", "negative count " + std::to_string(n));
    DocumentCount d{json_util::string_field(docs[i], field, "doc_id"), TokenCount(static_cast<std::uint64_t>(n))};
    sum += d.token_count;
    f.documents.push_back(std::move(d));
  }

  const auto total = json_util::integer_field(root, "", "total");
  if (total < 0) throw SchemaError("total", "negative count " + std::to_string(total));
  f.total = TokenCount(static_cast<std::uint64_t>(total));
  if (f.total != sum) {
    throw SchemaError("total", "declared " + std::to_string(f.total.value()) + " but documents sum to " +
                                   std::to_string(sum.value()));
  }

  if (root.contains("skipped")) {
    json_util::require_array(root["skipped"], "skipped");
    for (std::size_t i = 0; i < root["skipped"].size(); ++i) {
      if (!root["skipped"][i].is_string()) throw SchemaError(json_util::index("skipped", i), "expected string");
      f.skipped.push_back(root["skipped"][i].get<std::string>());
    }
  }
  return f;
}

inline TokenCountFile load_token_counts(const std::filesystem::path& path) {
  return parse_token_counts(json_util::read_file(path, "token count file"), path.string());
}

struct ApproxScheme {
  enum class Kind { whitespace, bytes_per_token };
  Kind kind = Kind::whitespace;
  double bytes_per_token = 4.0;
};

/// Desk-scale approximation: maximal non-whitespace runs, or
/// ceil(utf8 bytes / bytes_per_token).
inline TokenCount count_tokens_approx(std::string_view text, const ApproxScheme& scheme = {}) {
  if (scheme.kind == ApproxScheme::Kind::bytes_per_token) {
    if (!(scheme.bytes_per_token > 0)) throw InvalidValue("bytes_per_token must be positive");
    return TokenCount(static_cast<std::uint64_t>(std::ceil(static_cast<double>(text.size()) / scheme.bytes_per_token)));
  }
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  std::uint64_t n = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return TokenCount(n);
}

inline double mean_tokens(const TokenCountFile& f) {
  if (f.documents.empty()) throw InvalidValue("token count file '" + f.tokenizer_id + "' has no documents");
  return static_cast<double>(f.total.value()) / static_cast<double>(f.documents.size());
}

}  // namespace wattbench
