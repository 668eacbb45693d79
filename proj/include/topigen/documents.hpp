#pragma once

#include "topigen/core.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

namespace topigen {

/// A user-authored source document, prior to annotation.
struct RawDocument {
  std::string doc_id;
  std::string user_id;
  std::string text;
};

/// A document reduced to the set of topics it mentions. Mention offsets and
/// surface forms are gone; only document-level topic presence matters.
struct AnnotatedDocument {
  std::string doc_id;
  std::string user_id;
  std::vector<NodeId> topics;  // sorted, unique

  friend bool operator==(const AnnotatedDocument&, const AnnotatedDocument&) = default;
};

namespace detail {

/// Streams a JSON-lines file, invoking fn(record, lineno) per non-blank line.
template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw SchemaError(path.string(), lineno, "invalid JSON");
    }
    fn(j, lineno);
  }
  if (in.bad()) throw IoError("error while reading " + path.string());
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  const std::string& path, std::size_t lineno) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
    throw SchemaError(path, lineno,
                      std::string("missing or non-string field '") + key + "'");
  }
  std::string v = j[key].get<std::string>();
  if (v.empty()) {
    throw SchemaError(path, lineno, std::string("empty field '") + key + "'");
  }
  return v;
}

}  // namespace detail

inline std::vector<RawDocument> load_raw_documents(
    const std::filesystem::path& path) {
  std::vector<RawDocument> docs;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t n) {
    RawDocument d;
    d.doc_id = detail::require_string(j, "doc_id", path.string(), n);
    d.user_id = detail::require_string(j, "user_id", path.string(), n);
    if (!j.contains("text") || !j["text"].is_string()) {
      throw SchemaError(path.string(), n, "missing or non-string field 'text'");
    }
    d.text = j["text"].get<std::string>();
    docs.push_back(std::move(d));
  });
  return docs;
}

inline std::vector<AnnotatedDocument> load_annotated_documents(
    const std::filesystem::path& path) {
  std::vector<AnnotatedDocument> docs;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t n) {
    AnnotatedDocument d;
    d.doc_id = detail::require_string(j, "doc_id", path.string(), n);
    d.user_id = detail::require_string(j, "user_id", path.string(), n);
    if (!j.contains("topics") || !j["topics"].is_array()) {
      throw SchemaError(path.string(), n, "missing or non-array field 'topics'");
    }
    for (const auto& t : j["topics"]) {
      if (!t.is_string() || t.get<std::string>().empty()) {
        throw SchemaError(path.string(), n, "'topics' entries must be non-empty strings");
      }
      d.topics.push_back(t.get<std::string>());
    }
    std::sort(d.topics.begin(), d.topics.end());
    d.topics.erase(std::unique(d.topics.begin(), d.topics.end()), d.topics.end());
    docs.push_back(std::move(d));
  });
  return docs;
}

inline nlohmann::json annotated_document_to_json(const AnnotatedDocument& d) {
  return nlohmann::json{{"doc_id", d.doc_id},
                        {"user_id", d.user_id},
                        {"topics", d.topics}};
}

inline void save_annotated_documents(const std::vector<AnnotatedDocument>& docs,
                                     const std::filesystem::path& path) {
  std::string out;
  for (const AnnotatedDocument& d : docs) {
    out += annotated_document_to_json(d).dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace topigen
