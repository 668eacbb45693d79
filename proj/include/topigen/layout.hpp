#pragma once

#include "topigen/generalizer.hpp"
#include "topigen/profile.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace topigen {

enum class LayoutMode { flat, nested, clustered };

inline const char* to_string(LayoutMode m) {
  switch (m) {
    case LayoutMode::flat: return "flat";
    case LayoutMode::nested: return "nested";
    case LayoutMode::clustered: return "clustered";
  }
  return "flat";
}

inline std::optional<LayoutMode> layout_mode_from_string(std::string_view s) {
  if (s == "flat") return LayoutMode::flat;
  if (s == "nested") return LayoutMode::nested;
  if (s == "clustered") return LayoutMode::clustered;
  return std::nullopt;
}

enum class ItemKind { topic, category_header, more_link };

inline const char* to_string(ItemKind k) {
  switch (k) {
    case ItemKind::topic: return "topic";
    case ItemKind::category_header: return "category-header";
    case ItemKind::more_link: return "more-link";
  }
  return "topic";
}

inline std::optional<ItemKind> item_kind_from_string(std::string_view s) {
  if (s == "topic") return ItemKind::topic;
  if (s == "category-header") return ItemKind::category_header;
  if (s == "more-link") return ItemKind::more_link;
  return std::nullopt;
}

struct LayoutConfig {
  LayoutMode mode = LayoutMode::flat;
  int k = 3;  // clustered mode: topics shown per cluster

  void validate() const {
    if (k < 1) throw ConfigError("k must be >= 1");
  }
};

struct LayoutItem {
  std::string label;
  std::optional<std::uint32_t> weight;
  ItemKind kind = ItemKind::topic;
  std::vector<LayoutItem> children;

  friend bool operator==(const LayoutItem&, const LayoutItem&) = default;
};

struct ProfileLayout {
  LayoutMode mode = LayoutMode::flat;
  std::string user_id;
  std::vector<LayoutItem> entries;

  friend bool operator==(const ProfileLayout&, const ProfileLayout&) = default;
};

/// Maps a node id to its display label. The default resolver uses the
/// local-name fallback (substring after the last '/' or ':', underscores to
/// spaces); callers holding a graph can pass `graph_labels(g)` instead.
using LabelResolver = std::function<std::string(const NodeId&)>;

inline LabelResolver graph_labels(const CategoryGraph& g) {
  return [&g](const NodeId& id) { return g.label(id); };
}

namespace detail {

inline std::string resolve_label(const LabelResolver& resolver, const NodeId& id) {
  return resolver ? resolver(id) : local_name(id);
}

struct SortableTopic {
  NodeId id;
  std::uint32_t weight = 0;
  std::string label;
  std::string folded;
};

/// The flat-mode order: weight descending, then label ascending
/// (case-insensitively, by codepoint), then raw label, then id. The trailing
/// tie-breakers make this a total order on distinct topics.
inline bool flat_order(const SortableTopic& a, const SortableTopic& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  if (a.folded != b.folded) return a.folded < b.folded;
  if (a.label != b.label) return a.label < b.label;
  return a.id < b.id;
}

inline std::vector<SortableTopic> sorted_topics(
    const std::vector<NodeId>& ids, const TopicProfile& profile,
    const LabelResolver& resolver) {
  std::vector<SortableTopic> out;
  out.reserve(ids.size());
  for (const NodeId& id : ids) {
    SortableTopic t;
    t.id = id;
    t.weight = profile.weights.at(id);
    t.label = resolve_label(resolver, id);
    t.folded = ascii_fold(t.label);
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), flat_order);
  return out;
}

inline LayoutItem topic_item(const SortableTopic& t) {
  LayoutItem item;
  item.label = t.label;
  item.weight = t.weight;
  item.kind = ItemKind::topic;
  return item;
}

/// Clusters ordered by the sum of their members' weights, high to low; ties
/// by rank ascending, then category id.
inline std::vector<const Cluster*> ordered_clusters(const ClusterSet& cs,
                                                    const TopicProfile& profile) {
  for (const Cluster& c : cs.clusters) {
    for (const NodeId& t : c.members) {
      if (!profile.weights.count(t)) {
        throw IntegrityError("cluster '" + c.category + "' references topic '" + t +
                             "' missing from profile '" + profile.user_id + "'");
      }
    }
  }
  for (const NodeId& t : cs.orphans) {
    if (!profile.weights.count(t)) {
      throw IntegrityError("orphan topic '" + t + "' missing from profile '" +
                           profile.user_id + "'");
    }
  }
  std::vector<std::pair<std::uint64_t, const Cluster*>> keyed;
  keyed.reserve(cs.clusters.size());
  for (const Cluster& c : cs.clusters) {
    std::uint64_t sum = 0;
    for (const NodeId& t : c.members) sum += profile.weights.at(t);
    keyed.emplace_back(sum, &c);
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              if (a.second->rank != b.second->rank) return a.second->rank < b.second->rank;
              return a.second->category < b.second->category;
            });
  std::vector<const Cluster*> out;
  out.reserve(keyed.size());
  for (const auto& [sum, c] : keyed) out.push_back(c);
  return out;
}

}  // namespace detail

/// Flat mode: one topic item per profile topic, ordered from highest to
/// lowest weight with ties resolved alphabetically on the labels.
inline ProfileLayout render_flat(const TopicProfile& profile,
                                 const LabelResolver& resolver = {}) {
  ProfileLayout layout;
  layout.mode = LayoutMode::flat;
  layout.user_id = profile.user_id;
  std::vector<NodeId> ids;
  ids.reserve(profile.weights.size());
  for (const auto& [id, weight] : profile.weights) ids.push_back(id);
  for (const auto& t : detail::sorted_topics(ids, profile, resolver)) {
    layout.entries.push_back(detail::topic_item(t));
  }
  return layout;
}

/// Nested ("accordion") mode: one collapsed section per cluster, category
/// label on top, members below in flat order; orphan topics trail at depth 1.
inline ProfileLayout render_nested(const TopicProfile& profile,
                                   const ClusterSet& clusters,
                                   const LabelResolver& resolver = {}) {
  ProfileLayout layout;
  layout.mode = LayoutMode::nested;
  layout.user_id = profile.user_id;
  for (const Cluster* c : detail::ordered_clusters(clusters, profile)) {
    LayoutItem header;
    header.label = detail::resolve_label(resolver, c->category);
    header.kind = ItemKind::category_header;
    for (const auto& t : detail::sorted_topics(c->members, profile, resolver)) {
      header.children.push_back(detail::topic_item(t));
    }
    layout.entries.push_back(std::move(header));
  }
  for (const auto& t : detail::sorted_topics(clusters.orphans, profile, resolver)) {
    layout.entries.push_back(detail::topic_item(t));
  }
  return layout;
}

/// Clustered mode: per cluster, the k highest-weight members in the
/// foreground followed by exactly one more-link ("and {n-k} more topics in
/// {category}" when the cluster is larger than k, "in category {category}"
/// otherwise) whose children carry the full member list. Orphans trail as
/// plain topic items.
inline ProfileLayout render_clustered(const TopicProfile& profile,
                                      const ClusterSet& clusters, int k,
                                      const LabelResolver& resolver = {}) {
  if (k < 1) throw ConfigError("k must be >= 1");
  ProfileLayout layout;
  layout.mode = LayoutMode::clustered;
  layout.user_id = profile.user_id;
  for (const Cluster* c : detail::ordered_clusters(clusters, profile)) {
    const auto members = detail::sorted_topics(c->members, profile, resolver);
    const std::size_t n = members.size();
    const std::size_t shown = std::min(static_cast<std::size_t>(k), n);
    for (std::size_t i = 0; i < shown; ++i) {
      layout.entries.push_back(detail::topic_item(members[i]));
    }
    LayoutItem more;
    more.kind = ItemKind::more_link;
    const std::string category_label = detail::resolve_label(resolver, c->category);
    if (n > static_cast<std::size_t>(k)) {
      more.label = "and " + std::to_string(n - static_cast<std::size_t>(k)) +
                   " more topics in " + category_label;
    } else {
      more.label = "in category " + category_label;
    }
    for (const auto& t : members) more.children.push_back(detail::topic_item(t));
    layout.entries.push_back(std::move(more));
  }
  for (const auto& t : detail::sorted_topics(clusters.orphans, profile, resolver)) {
    layout.entries.push_back(detail::topic_item(t));
  }
  return layout;
}

// ---------------------------------------------------------------------------
// JSON serialization (layout_version 1)
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json item_to_json(const LayoutItem& item) {
  nlohmann::json j{{"kind", to_string(item.kind)}, {"label", item.label}};
  if (item.weight) j["weight"] = *item.weight;
  if (!item.children.empty()) {
    nlohmann::json children = nlohmann::json::array();
    for (const LayoutItem& c : item.children) children.push_back(item_to_json(c));
    j["children"] = std::move(children);
  }
  return j;
}

inline LayoutItem item_from_json(const nlohmann::json& j, const std::string& path,
                                 std::size_t lineno, int depth) {
  if (depth > 8) throw SchemaError(path, lineno, "layout tree too deep");
  LayoutItem item;
  item.label = require_string(j, "label", path, lineno);
  const std::string kind = require_string(j, "kind", path, lineno);
  auto k = item_kind_from_string(kind);
  if (!k) throw SchemaError(path, lineno, "unknown item kind '" + kind + "'");
  item.kind = *k;
  if (j.contains("weight")) {
    if (!j["weight"].is_number_unsigned() ||
        j["weight"].get<std::uint64_t>() > 0xffffffffull) {
      throw SchemaError(path, lineno, "'weight' must be an unsigned integer");
    }
    item.weight = static_cast<std::uint32_t>(j["weight"].get<std::uint64_t>());
  }
  if (j.contains("children")) {
    if (!j["children"].is_array()) {
      throw SchemaError(path, lineno, "'children' must be an array");
    }
    for (const auto& c : j["children"]) {
      item.children.push_back(item_from_json(c, path, lineno, depth + 1));
    }
  }
  return item;
}

}  // namespace detail

inline nlohmann::json layout_to_json_value(const ProfileLayout& layout) {
  nlohmann::json entries = nlohmann::json::array();
  for (const LayoutItem& item : layout.entries) {
    entries.push_back(detail::item_to_json(item));
  }
  return nlohmann::json{{"layout_version", 1},
                        {"mode", to_string(layout.mode)},
                        {"user_id", layout.user_id},
                        {"entries", std::move(entries)}};
}

/// Canonical JSON bytes: keys sorted within objects, two-space indent, UTF-8,
/// trailing newline. Serializing the same layout twice is byte-identical.
inline std::string to_json(const ProfileLayout& layout) {
  return layout_to_json_value(layout).dump(2) + "\n";
}

inline ProfileLayout layout_from_json(const std::string& text,
                                      const std::string& path = "<layout>") {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw SchemaError(path, 1, "invalid JSON");
  if (!j.contains("layout_version") || !j["layout_version"].is_number_integer() ||
      j["layout_version"].get<int>() != 1) {
    throw SchemaError(path, 1, "unsupported layout_version");
  }
  ProfileLayout layout;
  const std::string mode = detail::require_string(j, "mode", path, 1);
  auto m = layout_mode_from_string(mode);
  if (!m) throw SchemaError(path, 1, "unknown layout mode '" + mode + "'");
  layout.mode = *m;
  layout.user_id = detail::require_string(j, "user_id", path, 1);
  if (!j.contains("entries") || !j["entries"].is_array()) {
    throw SchemaError(path, 1, "missing or non-array field 'entries'");
  }
  for (const auto& e : j["entries"]) {
    layout.entries.push_back(detail::item_from_json(e, path, 1, 0));
  }
  return layout;
}

// ---------------------------------------------------------------------------
// HTML serialization
// ---------------------------------------------------------------------------

namespace detail {

inline std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline void html_topic_list(std::ostringstream& os, const char* css_class,
                            const std::vector<LayoutItem>& items) {
  os << "<ul class=\"" << css_class << "\">\n";
  for (const LayoutItem& item : items) {
    os << "  <li>" << html_escape(item.label) << "</li>\n";
  }
  os << "</ul>\n";
}

}  // namespace detail

/// Self-contained static HTML (inline style only, no external assets, UTF-8,
/// '\n' line endings). Nested mode renders clusters as closed <details>
/// sections (an accordion); clustered mode renders more-links as indented
/// <details> whose body holds the full member list.
inline std::string to_html(const ProfileLayout& layout) {
  std::ostringstream os;
  const std::string title = detail::html_escape(layout.user_id);
  os << "<!DOCTYPE html>\n"
     << "<html lang=\"en\">\n"
     << "<head>\n"
     << "<meta charset=\"utf-8\">\n"
     << "<title>Profile: " << title << "</title>\n"
     << "<style>\n"
     << "body { font-family: sans-serif; margin: 2rem; max-width: 40rem; }\n"
     << "h1 { font-size: 1.3rem; }\n"
     << "ul { margin: 0.2rem 0; padding-left: 1.4rem; }\n"
     << "details.cluster { margin: 0.3rem 0; }\n"
     << "details.cluster > summary { font-weight: bold; cursor: pointer; }\n"
     << "li.more { list-style: none; }\n"
     << "li.more > details > summary { font-style: italic; cursor: pointer; }\n"
     << "</style>\n"
     << "</head>\n"
     << "<body>\n"
     << "<h1>Profile: " << title << "</h1>\n";

  switch (layout.mode) {
    case LayoutMode::flat: {
      detail::html_topic_list(os, "topics", layout.entries);
      break;
    }
    case LayoutMode::nested: {
      std::vector<LayoutItem> orphans;
      for (const LayoutItem& item : layout.entries) {
        if (item.kind == ItemKind::category_header) {
          os << "<details class=\"cluster\">\n"
             << "<summary>" << detail::html_escape(item.label) << "</summary>\n";
          detail::html_topic_list(os, "members", item.children);
          os << "</details>\n";
        } else {
          orphans.push_back(item);
        }
      }
      if (!orphans.empty()) {
        detail::html_topic_list(os, "orphans", orphans);
      }
      break;
    }
    case LayoutMode::clustered: {
      os << "<ul class=\"topics\">\n";
      for (const LayoutItem& item : layout.entries) {
        if (item.kind == ItemKind::more_link) {
          os << "  <li class=\"more\"><details>\n"
             << "    <summary>" << detail::html_escape(item.label) << "</summary>\n"
             << "    <ul class=\"members\">\n";
          for (const LayoutItem& c : item.children) {
            os << "      <li>" << detail::html_escape(c.label) << "</li>\n";
          }
          os << "    </ul>\n"
             << "  </details></li>\n";
        } else {
          os << "  <li>" << detail::html_escape(item.label) << "</li>\n";
        }
      }
      os << "</ul>\n";
      break;
    }
  }
  os << "</body>\n</html>\n";
  return os.str();
}

}  // namespace topigen
