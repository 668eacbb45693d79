#pragma once

#include "topigen/category_graph.hpp"
#include "topigen/profile.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace topigen {

/// Knobs of the generalization step. m bounds the traversal (one subject edge
/// plus up to m-1 broader edges); kappa is the tie-penalty constant.
struct GeneralizationConfig {
  int m = 3;
  double kappa = 1.0;

  void validate() const {
    if (m < 1) throw ConfigError("m must be >= 1");
    if (m > 255) throw ConfigError("m must be <= 255 (distances are stored as 8-bit integers)");
    if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
  }

  friend bool operator==(const GeneralizationConfig&, const GeneralizationConfig&) = default;
};

namespace detail {

/// Bounded multi-source BFS over broader edges, seeded with the article's
/// subject parents at distance 0. Each category is recorded once, at its
/// minimum distance, which bounds cycles naturally. Returns (category index,
/// distance) pairs sorted by category index; all distances are < m.
inline std::vector<std::pair<std::uint32_t, std::uint8_t>> traverse_indexed(
    const CategoryGraph& g, std::uint32_t article, int m) {
  std::vector<std::pair<std::uint32_t, std::uint8_t>> out;
  auto subjects = g.subject_row(article);
  if (subjects.empty()) return out;

  std::unordered_map<std::uint32_t, std::uint8_t> seen;
  std::vector<std::uint32_t> frontier;
  seen.reserve(subjects.size() * 4);
  for (std::uint32_t c : subjects) {
    if (seen.emplace(c, 0).second) frontier.push_back(c);
  }
  std::vector<std::uint32_t> next;
  for (int level = 1; level <= m - 1 && !frontier.empty(); ++level) {
    next.clear();
    for (std::uint32_t c : frontier) {
      for (std::uint32_t b : g.broader_row(c)) {
        if (seen.emplace(b, static_cast<std::uint8_t>(level)).second) {
          next.push_back(b);
        }
      }
    }
    frontier.swap(next);
  }
  out.assign(seen.begin(), seen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Finds every category reachable from `topic` through one subject edge
/// followed by 0..m-1 broader edges, mapped to the minimum number of broader
/// edges on any such path. Unknown topics yield an empty mapping.
inline std::map<NodeId, int> traverse(const CategoryGraph& g, const NodeId& topic,
                                      int m) {
  if (m < 1) throw ConfigError("m must be >= 1");
  std::map<NodeId, int> out;
  auto idx = g.index_of(topic);
  if (!idx) return out;
  for (const auto& [cat, d] : detail::traverse_indexed(g, *idx, m)) {
    out.emplace(g.id_of(cat), d);
  }
  return out;
}

/// Sparse |C| x |E| matrix of category-topic minimum distances. Columns are
/// the profile topics in canonical E order (weight descending, id ascending,
/// including topics absent from the graph, whose columns stay empty). Rows
/// are exactly the categories hit by at least one traversal, id ascending.
/// Absent entries mean null; stored entries satisfy 0 <= d < m.
struct DistanceMatrix {
  std::vector<NodeId> topics;
  std::vector<NodeId> categories;
  /// rows[r] holds (column, distance) pairs with ascending column index.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint8_t>>> rows;

  std::uint32_t coverage(std::size_t r) const {
    return static_cast<std::uint32_t>(rows[r].size());
  }

  std::uint64_t distance_sum(std::size_t r) const {
    std::uint64_t sum = 0;
    for (const auto& [col, d] : rows[r]) sum += d;
    return sum;
  }

  std::size_t entry_count() const {
    std::size_t n = 0;
    for (const auto& row : rows) n += row.size();
    return n;
  }
};

inline DistanceMatrix build_matrix(const CategoryGraph& g, const TopicProfile& p,
                                   const GeneralizationConfig& cfg) {
  cfg.validate();
  DistanceMatrix mx;
  for (const auto& [id, weight] : p.topics_by_weight()) mx.topics.push_back(id);

  std::unordered_map<std::uint32_t, std::vector<std::pair<std::uint32_t, std::uint8_t>>>
      row_map;
  for (std::uint32_t col = 0; col < mx.topics.size(); ++col) {
    auto idx = g.index_of(mx.topics[col]);
    if (!idx) continue;
    for (const auto& [cat, d] : detail::traverse_indexed(g, *idx, cfg.m)) {
      row_map[cat].push_back({col, d});
    }
  }

  std::vector<std::pair<NodeId, std::uint32_t>> order;
  order.reserve(row_map.size());
  for (const auto& [cat, entries] : row_map) order.emplace_back(g.id_of(cat), cat);
  std::sort(order.begin(), order.end());
  mx.categories.reserve(order.size());
  mx.rows.reserve(order.size());
  for (auto& [id, cat] : order) {
    mx.categories.push_back(id);
    mx.rows.push_back(std::move(row_map[cat]));
  }
  return mx;
}

/// AdoptionRank(c, D) = kappa / Coverage^2 + (sum of the row's non-null
/// distances) / Coverage. Lower is better: a low value means the category is
/// superordinate to a larger group of topics and/or stands in a more direct
/// relation to them.
inline double adoption_rank(std::uint64_t distance_sum, std::uint64_t coverage,
                            double kappa) {
  if (coverage == 0) throw ConfigError("adoption_rank requires coverage >= 1");
  const double c = static_cast<double>(coverage);
  return kappa / (c * c) + static_cast<double>(distance_sum) / c;
}

struct RankedCategory {
  NodeId category;
  double rank = 0.0;
  std::uint32_t coverage = 0;
  std::uint64_t distance_sum = 0;
  std::uint32_t row = 0;  // index into DistanceMatrix::rows
};

/// One record per matrix row, sorted ascending by AdoptionRank. Exact ties
/// are broken by higher coverage first, then ascending category id, so the
/// order is deterministic.
inline std::vector<RankedCategory> rank_categories(const DistanceMatrix& mx,
                                                   const GeneralizationConfig& cfg) {
  cfg.validate();
  std::vector<RankedCategory> out;
  out.reserve(mx.rows.size());
  for (std::uint32_t r = 0; r < mx.rows.size(); ++r) {
    RankedCategory rc;
    rc.category = mx.categories[r];
    rc.coverage = mx.coverage(r);
    rc.distance_sum = mx.distance_sum(r);
    rc.rank = adoption_rank(rc.distance_sum, rc.coverage, cfg.kappa);
    rc.row = r;
    out.push_back(std::move(rc));
  }
  std::sort(out.begin(), out.end(), [](const RankedCategory& a, const RankedCategory& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.coverage != b.coverage) return a.coverage > b.coverage;
    return a.category < b.category;
  });
  return out;
}

struct Cluster {
  NodeId category;
  double rank = 0.0;
  /// Every topic with a non-null distance to the category, in column order
  /// (weight descending, id ascending). Topics may appear in several
  /// clusters' member lists.
  std::vector<NodeId> members;
  /// The members that were still unassigned when this cluster was promoted;
  /// always at least two, disjoint across clusters.
  std::vector<NodeId> newly_assigned;

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct ClusterSet {
  std::string user_id;
  GeneralizationConfig config;
  std::vector<Cluster> clusters;  // nondecreasing rank
  std::vector<NodeId> orphans;    // topics assigned to no cluster

  friend bool operator==(const ClusterSet&, const ClusterSet&) = default;
};

/// Greedy cluster selection: walk the ranked categories, promote one to a
/// cluster whenever it covers at least two still-unassigned topics, mark
/// those topics assigned, and stop once everything is assigned. Whatever
/// remains unassigned afterwards is an orphan.
inline ClusterSet cluster(const std::vector<RankedCategory>& ranked,
                          const DistanceMatrix& mx,
                          const std::set<NodeId>& topic_set) {
  ClusterSet cs;
  std::unordered_map<std::string, std::uint32_t> col_of;
  col_of.reserve(mx.topics.size());
  for (std::uint32_t i = 0; i < mx.topics.size(); ++i) col_of.emplace(mx.topics[i], i);

  std::vector<char> to_assign(mx.topics.size(), 0);
  std::size_t remaining = 0;
  std::vector<NodeId> off_matrix;  // topics in E without a matrix column
  for (const NodeId& e : topic_set) {
    auto it = col_of.find(e);
    if (it == col_of.end()) {
      off_matrix.push_back(e);
    } else if (!to_assign[it->second]) {
      to_assign[it->second] = 1;
      ++remaining;
    }
  }

  for (const RankedCategory& rc : ranked) {
    if (remaining == 0) break;
    const auto& row = mx.rows[rc.row];
    std::vector<std::uint32_t> in_both;
    for (const auto& [col, d] : row) {
      if (to_assign[col]) in_both.push_back(col);
    }
    if (in_both.size() > 1) {
      Cluster cl;
      cl.category = rc.category;
      cl.rank = rc.rank;
      cl.members.reserve(row.size());
      for (const auto& [col, d] : row) cl.members.push_back(mx.topics[col]);
      cl.newly_assigned.reserve(in_both.size());
      for (std::uint32_t col : in_both) {
        cl.newly_assigned.push_back(mx.topics[col]);
        to_assign[col] = 0;
      }
      remaining -= in_both.size();
      cs.clusters.push_back(std::move(cl));
    }
  }

  for (std::uint32_t col = 0; col < to_assign.size(); ++col) {
    if (to_assign[col]) cs.orphans.push_back(mx.topics[col]);
  }
  cs.orphans.insert(cs.orphans.end(), off_matrix.begin(), off_matrix.end());
  return cs;
}

/// The full generalization pipeline for one profile: distance matrix, ranked
/// categories, cluster selection. Deterministic for identical inputs.
inline ClusterSet generalize(const CategoryGraph& g, const TopicProfile& p,
                             const GeneralizationConfig& cfg) {
  cfg.validate();
  const DistanceMatrix mx = build_matrix(g, p, cfg);
  const std::vector<RankedCategory> ranked = rank_categories(mx, cfg);
  std::set<NodeId> topic_set;
  for (const auto& [id, weight] : p.weights) topic_set.insert(id);
  ClusterSet cs = cluster(ranked, mx, topic_set);
  cs.user_id = p.user_id;
  cs.config = cfg;
  return cs;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json cluster_set_to_json(const ClusterSet& cs) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const Cluster& c : cs.clusters) {
    clusters.push_back({{"category", c.category},
                        {"rank", c.rank},
                        {"members", c.members},
                        {"newly_assigned", c.newly_assigned}});
  }
  return nlohmann::json{{"user_id", cs.user_id},
                        {"config", {{"m", cs.config.m}, {"kappa", cs.config.kappa}}},
                        {"clusters", std::move(clusters)},
                        {"orphans", cs.orphans}};
}

inline ClusterSet cluster_set_from_json(const nlohmann::json& j,
                                        const std::string& path,
                                        std::size_t lineno) {
  ClusterSet cs;
  cs.user_id = detail::require_string(j, "user_id", path, lineno);
  if (!j.contains("config") || !j["config"].is_object() ||
      !j["config"].contains("m") || !j["config"]["m"].is_number_integer() ||
      !j["config"].contains("kappa") || !j["config"]["kappa"].is_number()) {
    throw SchemaError(path, lineno, "missing or malformed 'config'");
  }
  cs.config.m = j["config"]["m"].get<int>();
  cs.config.kappa = j["config"]["kappa"].get<double>();
  try {
    cs.config.validate();
  } catch (const ConfigError& e) {
    throw SchemaError(path, lineno, e.what());
  }
  if (!j.contains("clusters") || !j["clusters"].is_array()) {
    throw SchemaError(path, lineno, "missing or non-array field 'clusters'");
  }
  auto read_ids = [&](const nlohmann::json& arr, const char* what) {
    std::vector<NodeId> out;
    for (const auto& v : arr) {
      if (!v.is_string() || v.get<std::string>().empty()) {
        throw SchemaError(path, lineno,
                          std::string(what) + " entries must be non-empty strings");
      }
      out.push_back(v.get<std::string>());
    }
    return out;
  };
  for (const auto& cj : j["clusters"]) {
    Cluster c;
    c.category = detail::require_string(cj, "category", path, lineno);
    if (!cj.contains("rank") || !cj["rank"].is_number()) {
      throw SchemaError(path, lineno, "cluster 'rank' must be a number");
    }
    c.rank = cj["rank"].get<double>();
    if (!cj.contains("members") || !cj["members"].is_array() ||
        !cj.contains("newly_assigned") || !cj["newly_assigned"].is_array()) {
      throw SchemaError(path, lineno, "clusters need 'members' and 'newly_assigned' arrays");
    }
    c.members = read_ids(cj["members"], "'members'");
    c.newly_assigned = read_ids(cj["newly_assigned"], "'newly_assigned'");
    if (c.newly_assigned.size() < 2) {
      throw SchemaError(path, lineno, "clusters must have at least 2 newly assigned topics");
    }
    std::set<NodeId> member_set(c.members.begin(), c.members.end());
    for (const NodeId& t : c.newly_assigned) {
      if (!member_set.count(t)) {
        throw SchemaError(path, lineno,
                          "newly assigned topic '" + t + "' is not a cluster member");
      }
    }
    cs.clusters.push_back(std::move(c));
  }
  if (!j.contains("orphans") || !j["orphans"].is_array()) {
    throw SchemaError(path, lineno, "missing or non-array field 'orphans'");
  }
  cs.orphans = read_ids(j["orphans"], "'orphans'");
  return cs;
}

inline std::vector<ClusterSet> load_cluster_sets(const std::filesystem::path& path) {
  std::vector<ClusterSet> out;
  detail::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t n) {
    out.push_back(cluster_set_from_json(j, path.string(), n));
  });
  return out;
}

inline void save_cluster_sets(std::span<const ClusterSet> sets,
                              const std::filesystem::path& path) {
  std::string out;
  for (const ClusterSet& cs : sets) {
    out += cluster_set_to_json(cs).dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace topigen
