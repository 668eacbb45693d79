#pragma once

#include "topigen/core.hpp"

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace topigen {

/// Node classification. Articles are sources of subject edges; categories are
/// subject-edge targets and broader-edge endpoints. The two sets are disjoint.
enum class NodeKind : std::uint8_t { article = 0, category = 1 };

/// Counters reported by ingestion.
struct IngestStats {
  std::uint64_t articles = 0;
  std::uint64_t categories = 0;
  std::uint64_t subject_edges = 0;
  std::uint64_t broader_edges = 0;
  std::uint64_t duplicates_dropped = 0;
  /// N-Triples only: well-formed triples with a foreign predicate.
  std::uint64_t triples_skipped = 0;
  /// N-Triples only: malformed lines that were not retained triples.
  std::uint64_t invalid_skipped = 0;
  /// Labels applied to nodes present in the graph.
  std::uint64_t labels = 0;
};

/// Immutable bipartite-plus-hierarchy graph: article nodes, category nodes,
/// subject edges (article -> category) and broader edges (category ->
/// category, cycles permitted). Node ids are interned to dense integers in
/// ascending id order; adjacency is stored as sorted CSR arrays. Safe for
/// concurrent reads after construction.
class CategoryGraph {
public:
  CategoryGraph() = default;

  std::size_t node_count() const { return ids_.size(); }
  std::size_t article_count() const { return article_count_; }
  std::size_t category_count() const { return ids_.size() - article_count_; }
  std::size_t subject_edge_count() const { return subject_targets_.size(); }
  std::size_t broader_edge_count() const { return broader_targets_.size(); }

  bool contains(const NodeId& id) const { return index_.find(id) != index_.end(); }

  std::optional<std::uint32_t> index_of(const NodeId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const NodeId& id_of(std::uint32_t index) const { return ids_[index]; }
  NodeKind kind_of(std::uint32_t index) const { return kinds_[index]; }

  std::optional<NodeKind> kind(const NodeId& id) const {
    auto idx = index_of(id);
    if (!idx) return std::nullopt;
    return kinds_[*idx];
  }

  std::span<const std::uint32_t> subject_row(std::uint32_t index) const {
    return row(subject_offsets_, subject_targets_, index);
  }

  std::span<const std::uint32_t> broader_row(std::uint32_t index) const {
    return row(broader_offsets_, broader_targets_, index);
  }

  /// Subject-edge targets of an article; empty for unknown ids and for
  /// category ids (categories never have subject edges).
  std::vector<NodeId> parents(const NodeId& article) const {
    return row_ids(subject_offsets_, subject_targets_, article);
  }

  /// Broader-edge targets of a category; empty for unknown ids and articles.
  std::vector<NodeId> broaders(const NodeId& category) const {
    return row_ids(broader_offsets_, broader_targets_, category);
  }

  /// Stored label, or the local-name fallback. Never empty for non-empty ids.
  std::string label(const NodeId& id) const {
    auto idx = index_of(id);
    if (idx) {
      auto it = labels_.find(*idx);
      if (it != labels_.end()) return it->second;
    }
    return local_name(id);
  }

  std::vector<NodeId> articles() const { return ids_of_kind(NodeKind::article); }
  std::vector<NodeId> categories() const { return ids_of_kind(NodeKind::category); }

  /// Structural equality. Interning is canonical (ids ascending), so two
  /// graphs built from the same edge set compare equal regardless of the
  /// order their input lines arrived in.
  friend bool operator==(const CategoryGraph& a, const CategoryGraph& b) {
    return a.ids_ == b.ids_ && a.kinds_ == b.kinds_ &&
           a.subject_offsets_ == b.subject_offsets_ &&
           a.subject_targets_ == b.subject_targets_ &&
           a.broader_offsets_ == b.broader_offsets_ &&
           a.broader_targets_ == b.broader_targets_ && a.labels_ == b.labels_;
  }

  // Accessors used by the index reader/writer.
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<NodeKind>& kinds() const { return kinds_; }
  const std::vector<std::uint64_t>& subject_offsets() const { return subject_offsets_; }
  const std::vector<std::uint32_t>& subject_targets() const { return subject_targets_; }
  const std::vector<std::uint64_t>& broader_offsets() const { return broader_offsets_; }
  const std::vector<std::uint32_t>& broader_targets() const { return broader_targets_; }
  const std::map<std::uint32_t, std::string>& stored_labels() const { return labels_; }

  /// Reassembles a graph from already-validated parts (index deserialization).
  static CategoryGraph from_parts(std::vector<std::string> ids,
                                  std::vector<NodeKind> kinds,
                                  std::vector<std::uint64_t> subject_offsets,
                                  std::vector<std::uint32_t> subject_targets,
                                  std::vector<std::uint64_t> broader_offsets,
                                  std::vector<std::uint32_t> broader_targets,
                                  std::map<std::uint32_t, std::string> labels) {
    CategoryGraph g;
    g.ids_ = std::move(ids);
    g.kinds_ = std::move(kinds);
    g.subject_offsets_ = std::move(subject_offsets);
    g.subject_targets_ = std::move(subject_targets);
    g.broader_offsets_ = std::move(broader_offsets);
    g.broader_targets_ = std::move(broader_targets);
    g.labels_ = std::move(labels);
    g.article_count_ = static_cast<std::size_t>(
        std::count(g.kinds_.begin(), g.kinds_.end(), NodeKind::article));
    g.index_.reserve(g.ids_.size());
    for (std::uint32_t i = 0; i < g.ids_.size(); ++i) g.index_.emplace(g.ids_[i], i);
    return g;
  }

private:
  friend class GraphBuilder;

  std::span<const std::uint32_t> row(const std::vector<std::uint64_t>& offsets,
                                     const std::vector<std::uint32_t>& targets,
                                     std::uint32_t index) const {
    if (index >= ids_.size()) return {};
    return std::span<const std::uint32_t>(targets.data() + offsets[index],
                                          targets.data() + offsets[index + 1]);
  }

  std::vector<NodeId> row_ids(const std::vector<std::uint64_t>& offsets,
                              const std::vector<std::uint32_t>& targets,
                              const NodeId& id) const {
    std::vector<NodeId> out;
    auto idx = index_of(id);
    if (!idx) return out;
    for (std::uint32_t t : row(offsets, targets, *idx)) out.push_back(ids_[t]);
    return out;  // target indices ascend, and index order equals id order
  }

  std::vector<NodeId> ids_of_kind(NodeKind k) const {
    std::vector<NodeId> out;
    for (std::uint32_t i = 0; i < ids_.size(); ++i) {
      if (kinds_[i] == k) out.push_back(ids_[i]);
    }
    return out;
  }

  std::vector<std::string> ids_;  // ascending; position is the interned index
  std::vector<NodeKind> kinds_;
  std::size_t article_count_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::uint64_t> subject_offsets_;  // size node_count + 1
  std::vector<std::uint32_t> subject_targets_;  // sorted within each row
  std::vector<std::uint64_t> broader_offsets_;
  std::vector<std::uint32_t> broader_targets_;
  std::map<std::uint32_t, std::string> labels_;
};

/// Accumulates edges and labels, then finalizes into a CategoryGraph. Edge
/// order does not matter: deduplication, classification and interning all
/// happen in finalize(), over sets.
class GraphBuilder {
public:
  void add_subject_edge(NodeId article, NodeId category) {
    check_id(article);
    check_id(category);
    subject_edges_.emplace_back(std::move(article), std::move(category));
  }

  void add_broader_edge(NodeId narrower, NodeId broader) {
    check_id(narrower);
    check_id(broader);
    broader_edges_.emplace_back(std::move(narrower), std::move(broader));
  }

  void set_label(NodeId id, std::string label) {
    check_id(id);
    labels_.emplace_back(std::move(id), std::move(label));
  }

  /// Builds the graph. Throws ClassificationError if any node would be both
  /// an article and a category.
  CategoryGraph finalize(IngestStats* stats = nullptr) {
    const std::size_t raw_edges = subject_edges_.size() + broader_edges_.size();
    dedup(subject_edges_);
    dedup(broader_edges_);
    const std::uint64_t dropped =
        raw_edges - subject_edges_.size() - broader_edges_.size();

    std::set<std::string> articles;
    std::set<std::string> categories;
    for (const auto& [a, c] : subject_edges_) {
      articles.insert(a);
      categories.insert(c);
    }
    for (const auto& [n, b] : broader_edges_) {
      categories.insert(n);
      categories.insert(b);
    }
    for (const std::string& a : articles) {
      if (categories.count(a)) {
        throw ClassificationError("node '" + a +
                                  "' is used as both an article and a category");
      }
    }

    CategoryGraph g;
    g.ids_.reserve(articles.size() + categories.size());
    std::merge(articles.begin(), articles.end(), categories.begin(),
               categories.end(), std::back_inserter(g.ids_));
    g.kinds_.resize(g.ids_.size());
    g.index_.reserve(g.ids_.size());
    for (std::uint32_t i = 0; i < g.ids_.size(); ++i) {
      g.index_.emplace(g.ids_[i], i);
      g.kinds_[i] = articles.count(g.ids_[i]) ? NodeKind::article : NodeKind::category;
    }
    g.article_count_ = articles.size();

    build_csr(g, subject_edges_, g.subject_offsets_, g.subject_targets_);
    build_csr(g, broader_edges_, g.broader_offsets_, g.broader_targets_);

    std::uint64_t applied = 0;
    for (const auto& [id, label] : labels_) {
      auto idx = g.index_of(id);
      if (!idx) continue;  // label for a node that has no edges; ignore
      auto [it, inserted] = g.labels_.insert_or_assign(*idx, label);
      (void)it;
      if (inserted) ++applied;
    }

    if (stats) {
      stats->articles = articles.size();
      stats->categories = categories.size();
      stats->subject_edges = subject_edges_.size();
      stats->broader_edges = broader_edges_.size();
      stats->duplicates_dropped = dropped;
      stats->labels = applied;
    }
    return g;
  }

private:
  using EdgeList = std::vector<std::pair<std::string, std::string>>;

  static void check_id(const NodeId& id) {
    if (id.empty()) throw Error("empty node id");
    if (id.find_first_of(" \t\r\n") != std::string::npos) {
      throw Error("node id contains whitespace: '" + id + "'");
    }
  }

  static void dedup(EdgeList& edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }

  static void build_csr(CategoryGraph& g, const EdgeList& edges,
                        std::vector<std::uint64_t>& offsets,
                        std::vector<std::uint32_t>& targets) {
    offsets.assign(g.ids_.size() + 1, 0);
    for (const auto& [src, tgt] : edges) ++offsets[*g.index_of(src) + 1];
    for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
    targets.resize(edges.size());
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& [src, tgt] : edges) {
      targets[cursor[*g.index_of(src)]++] = *g.index_of(tgt);
    }
    // Edge lists are sorted by (source id, target id) and index order equals
    // id order, so each row comes out sorted.
  }

  EdgeList subject_edges_;
  EdgeList broader_edges_;
  std::vector<std::pair<std::string, std::string>> labels_;  // in order; last wins
};

}  // namespace topigen
