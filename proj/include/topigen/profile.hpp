#pragma once

#include "topigen/documents.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace topigen {

/// A user's weighted topic set E: topic id -> number of distinct source
/// documents mentioning it.
struct TopicProfile {
  std::string user_id;
  std::optional<std::string> display_name;
  std::map<NodeId, std::uint32_t> weights;

  bool empty() const { return weights.empty(); }

  /// Topics ordered by weight descending, then id ascending. This is the
  /// canonical E order used for serialization and matrix columns.
  std::vector<std::pair<NodeId, std::uint32_t>> topics_by_weight() const {
    std::vector<std::pair<NodeId, std::uint32_t>> out(weights.begin(), weights.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return a.second > b.second;
    });
    return out;
  }

  friend bool operator==(const TopicProfile&, const TopicProfile&) = default;
};

/// Aggregates the documents matching user_id into a profile. Documents with
/// other user_ids are ignored. Repeated doc_ids are deduplicated, last
/// occurrence wins; a repeat with a differing topic set is reported through
/// the optional warning sink.
inline TopicProfile build_profile(std::span<const AnnotatedDocument> docs,
                                  const std::string& user_id,
                                  std::vector<std::string>* warnings = nullptr) {
  std::map<std::string, const AnnotatedDocument*> by_doc;
  for (const AnnotatedDocument& d : docs) {
    if (d.user_id != user_id) continue;
    auto [it, inserted] = by_doc.try_emplace(d.doc_id, &d);
    if (!inserted) {
      if (warnings && it->second->topics != d.topics) {
        warnings->push_back("duplicate doc_id '" + d.doc_id + "' for user '" +
                            user_id + "' with differing topic sets; keeping the last");
      }
      it->second = &d;
    }
  }
  TopicProfile p;
  p.user_id = user_id;
  for (const auto& [doc_id, doc] : by_doc) {
    for (const NodeId& topic : doc->topics) ++p.weights[topic];
  }
  return p;
}

/// Pointwise sum of two profiles for the same user. The caller guarantees the
/// underlying document sets are disjoint.
inline TopicProfile merge_profiles(const TopicProfile& a, const TopicProfile& b) {
  if (a.user_id != b.user_id) {
    throw IntegrityError("cannot merge profiles of different users: '" +
                         a.user_id + "' vs '" + b.user_id + "'");
  }
  TopicProfile out = a;
  if (!out.display_name) out.display_name = b.display_name;
  for (const auto& [topic, weight] : b.weights) out.weights[topic] += weight;
  return out;
}

inline nlohmann::json profile_to_json(const TopicProfile& p) {
  nlohmann::json topics = nlohmann::json::array();
  for (const auto& [id, weight] : p.topics_by_weight()) {
    topics.push_back({{"id", id}, {"weight", weight}});
  }
  nlohmann::json j{{"user_id", p.user_id}, {"topics", std::move(topics)}};
  if (p.display_name) j["display_name"] = *p.display_name;
  return j;
}

inline TopicProfile profile_from_json(const nlohmann::json& j,
                                      const std::string& path, std::size_t lineno) {
  TopicProfile p;
  p.user_id = detail::require_string(j, "user_id", path, lineno);
  if (j.contains("display_name")) {
    if (!j["display_name"].is_string()) {
      throw SchemaError(path, lineno, "'display_name' must be a string");
    }
    p.display_name = j["display_name"].get<std::string>();
  }
  if (!j.contains("topics") || !j["topics"].is_array()) {
    throw SchemaError(path, lineno, "missing or non-array field 'topics'");
  }
  for (const auto& t : j["topics"]) {
    if (!t.is_object() || !t.contains("id") || !t["id"].is_string() ||
        t["id"].get<std::string>().empty()) {
      throw SchemaError(path, lineno, "topic entries need a non-empty string 'id'");
    }
    if (!t.contains("weight") || !t["weight"].is_number_unsigned() ||
        t["weight"].get<std::uint64_t>() == 0 ||
        t["weight"].get<std::uint64_t>() > 0xffffffffull) {
      throw SchemaError(path, lineno, "topic weights must be integers >= 1");
    }
    const std::string id = t["id"].get<std::string>();
    if (p.weights.count(id)) {
      throw SchemaError(path, lineno, "duplicate topic id '" + id + "'");
    }
    p.weights[id] = static_cast<std::uint32_t>(t["weight"].get<std::uint64_t>());
  }
  return p;
}

inline std::vector<TopicProfile> load_profiles(const std::filesystem::path& path) {
  std::vector<TopicProfile> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t n) {
    out.push_back(profile_from_json(j, path.string(), n));
  });
  return out;
}

inline void save_profiles(std::span<const TopicProfile> profiles,
                          const std::filesystem::path& path) {
  std::string out;
  for (const TopicProfile& p : profiles) {
    out += profile_to_json(p).dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace topigen
