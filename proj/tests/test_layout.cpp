#include "topigen/layout.hpp"

#include "topigen/ingest.hpp"
#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

using namespace topigen;
using test_support::TempDir;

namespace {

TopicProfile profile_of(std::string user,
                        std::initializer_list<std::pair<const NodeId, std::uint32_t>> ws) {
  TopicProfile p;
  p.user_id = std::move(user);
  p.weights = ws;
  return p;
}

std::vector<std::string> labels_of(const ProfileLayout& layout) {
  std::vector<std::string> out;
  for (const LayoutItem& item : layout.entries) out.push_back(item.label);
  return out;
}

Cluster make_cluster(NodeId category, double rank, std::vector<NodeId> members) {
  Cluster c;
  c.category = std::move(category);
  c.rank = rank;
  c.members = members;
  c.newly_assigned = std::move(members);
  return c;
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace

// ---------------------------------------------------------------------------
// flat
// ---------------------------------------------------------------------------

TEST_CASE("flat layout orders by weight then label", "[layout]") {
  const auto p = profile_of("u", {{"t:Cherry", 1}, {"t:Banana", 3}, {"t:Apple", 3}});
  const ProfileLayout layout = render_flat(p);
  CHECK(labels_of(layout) == std::vector<std::string>{"Apple", "Banana", "Cherry"});
  CHECK(layout.mode == LayoutMode::flat);
  for (const LayoutItem& item : layout.entries) CHECK(item.kind == ItemKind::topic);
}

TEST_CASE("flat layout of an empty profile is empty", "[layout]") {
  CHECK(render_flat(profile_of("u", {})).entries.empty());
}

TEST_CASE("flat ties compare labels case-insensitively", "[layout]") {
  const auto p = profile_of("u", {{"t:b", 1}, {"t:A", 1}});
  CHECK(labels_of(render_flat(p)) == std::vector<std::string>{"A", "b"});
}

TEST_CASE("the flat comparator is a strict total order", "[layout]") {
  std::mt19937 rng(11);
  const std::vector<std::string> names = {"a", "A", "b", "B", "ab", "Ab", "z", "Z9"};
  std::vector<detail::SortableTopic> topics;
  int serial = 0;
  for (const std::string& n : names) {
    for (std::uint32_t w = 1; w <= 3; ++w) {
      detail::SortableTopic t;
      t.id = "t:" + std::to_string(serial++);
      t.weight = w;
      t.label = n;
      t.folded = ascii_fold(n);
      topics.push_back(t);
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(topics.begin(), topics.end(), rng);
    for (const auto& a : topics) {
      CHECK(!detail::flat_order(a, a));  // irreflexive
      for (const auto& b : topics) {
        if (detail::flat_order(a, b)) CHECK(!detail::flat_order(b, a));  // asymmetric
        for (const auto& c : topics) {
          if (detail::flat_order(a, b) && detail::flat_order(b, c)) {
            CHECK(detail::flat_order(a, c));  // transitive
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// nested
// ---------------------------------------------------------------------------

TEST_CASE("nested clusters are ordered by summed member weight", "[layout]") {
  const auto p = profile_of(
      "u", {{"t:a", 2}, {"t:b", 1}, {"t:c", 1}, {"t:d", 1}, {"t:lone", 9}});
  ClusterSet cs;
  cs.clusters.push_back(make_cluster("cat:Two", 0.1, {"t:c", "t:d"}));      // sum 2
  cs.clusters.push_back(make_cluster("cat:Three", 0.2, {"t:a", "t:b"}));    // sum 3
  cs.orphans = {"t:lone"};
  const ProfileLayout layout = render_nested(p, cs);
  REQUIRE(layout.entries.size() == 3);
  CHECK(layout.entries[0].label == "Three");
  CHECK(layout.entries[0].kind == ItemKind::category_header);
  CHECK(layout.entries[1].label == "Two");
  CHECK(layout.entries[2].label == "lone");  // orphan at the bottom, depth 1
  CHECK(layout.entries[2].kind == ItemKind::topic);
  REQUIRE(layout.entries[0].children.size() == 2);
  CHECK(layout.entries[0].children[0].label == "a");  // weight 2 before weight 1
  CHECK(layout.entries[0].children[1].label == "b");
}

TEST_CASE("nested ties fall back to rank then category id", "[layout]") {
  const auto p = profile_of("u", {{"t:a", 1}, {"t:b", 1}, {"t:c", 1}, {"t:d", 1}});
  ClusterSet cs;
  cs.clusters.push_back(make_cluster("cat:B", 0.2, {"t:a", "t:b"}));
  cs.clusters.push_back(make_cluster("cat:A", 0.2, {"t:c", "t:d"}));
  cs.clusters.push_back(make_cluster("cat:C", 0.1, {"t:a", "t:d"}));
  const ProfileLayout layout = render_nested(p, cs);
  CHECK(labels_of(layout) == std::vector<std::string>{"C", "A", "B"});
}

TEST_CASE("nested layout without clusters degenerates to a flat listing", "[layout]") {
  const auto p = profile_of("u", {{"t:x", 2}, {"t:y", 1}, {"t:z", 3}});
  ClusterSet cs;
  cs.orphans = {"t:x", "t:y", "t:z"};
  const ProfileLayout nested = render_nested(p, cs);
  const ProfileLayout flat = render_flat(p);
  CHECK(nested.entries == flat.entries);
}

TEST_CASE("cluster members missing from the profile are an integrity error",
          "[layout]") {
  const auto p = profile_of("u", {{"t:a", 1}});
  ClusterSet cs;
  cs.clusters.push_back(make_cluster("cat:X", 0.1, {"t:a", "t:ghost"}));
  CHECK_THROWS_AS(render_nested(p, cs), IntegrityError);
  CHECK_THROWS_AS(render_clustered(p, cs, 3), IntegrityError);

  ClusterSet orphan_only;
  orphan_only.orphans = {"t:ghost"};
  CHECK_THROWS_AS(render_nested(p, orphan_only), IntegrityError);
}

// ---------------------------------------------------------------------------
// clustered
// ---------------------------------------------------------------------------

namespace {

/// Weights chosen so the Materials cluster outweighs Jewellery, as in the
/// mock-up: both more-link texts below are asserted byte-exactly.
std::pair<TopicProfile, ClusterSet> mockup_fixture() {
  TopicProfile p = profile_of(
      "maker", {{"t:Metal", 5}, {"t:Glass", 4}, {"t:Wool", 3}, {"t:Plastic", 1},
                {"t:Ceramic", 1}, {"t:Necklace", 4}, {"t:Pearl", 3}, {"t:Emerald", 2}});
  ClusterSet cs;
  cs.clusters.push_back(make_cluster(
      "cat:Materials", 0.04, {"t:Metal", "t:Glass", "t:Wool", "t:Plastic", "t:Ceramic"}));
  cs.clusters.push_back(
      make_cluster("cat:Jewellery", 0.111, {"t:Necklace", "t:Pearl", "t:Emerald"}));
  return {std::move(p), std::move(cs)};
}

}  // namespace

TEST_CASE("clustered layout shows top-k plus one more-link per cluster", "[layout]") {
  const auto [p, cs] = mockup_fixture();
  const ProfileLayout layout = render_clustered(p, cs, 3);
  CHECK(labels_of(layout) ==
        std::vector<std::string>{"Metal", "Glass", "Wool",
                                 "and 2 more topics in Materials", "Necklace",
                                 "Pearl", "Emerald", "in category Jewellery"});
  CHECK(layout.entries[3].kind == ItemKind::more_link);
  CHECK(layout.entries[7].kind == ItemKind::more_link);
  // The more-link reveals the full member list, weight-ordered.
  REQUIRE(layout.entries[3].children.size() == 5);
  CHECK(layout.entries[3].children[2].label == "Wool");
  CHECK(layout.entries[3].children[3].label == "Ceramic");
  CHECK(layout.entries[3].children[4].label == "Plastic");
}

TEST_CASE("small clusters keep both topics and the in-category line", "[layout]") {
  const auto p = profile_of("u", {{"t:a", 2}, {"t:b", 1}});
  ClusterSet cs;
  cs.clusters.push_back(make_cluster("cat:X", 0.25, {"t:a", "t:b"}));
  const ProfileLayout layout = render_clustered(p, cs, 5);
  CHECK(labels_of(layout) == std::vector<std::string>{"a", "b", "in category X"});
}

TEST_CASE("clustered mode shows exactly min(k,n) topics and one more-link",
          "[layout]") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    const int k = std::uniform_int_distribution<int>(1, 6)(rng);
    TopicProfile p;
    p.user_id = "u";
    std::vector<NodeId> members;
    for (int i = 0; i < n; ++i) {
      const NodeId id = "t:m" + std::to_string(i);
      p.weights[id] = std::uniform_int_distribution<std::uint32_t>(1, 5)(rng);
      members.push_back(id);
    }
    ClusterSet cs;
    cs.clusters.push_back(make_cluster("cat:X", 0.1, members));
    const ProfileLayout layout = render_clustered(p, cs, k);
    std::size_t topic_items = 0, more_links = 0;
    for (const LayoutItem& item : layout.entries) {
      if (item.kind == ItemKind::topic) ++topic_items;
      if (item.kind == ItemKind::more_link) ++more_links;
    }
    CHECK(topic_items == std::min<std::size_t>(k, n));
    CHECK(more_links == 1);
  }
}

TEST_CASE("k must be at least one", "[layout]") {
  const auto [p, cs] = mockup_fixture();
  CHECK_THROWS_AS(render_clustered(p, cs, 0), ConfigError);
  LayoutConfig cfg;
  cfg.k = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

TEST_CASE("layout json round-trips and is byte-stable", "[layout]") {
  const auto [p, cs] = mockup_fixture();
  for (const ProfileLayout& layout :
       {render_flat(p), render_nested(p, cs), render_clustered(p, cs, 3)}) {
    const std::string a = to_json(layout);
    const std::string b = to_json(layout);
    CHECK(a == b);
    CHECK(a.back() == '\n');
    CHECK(layout_from_json(a) == layout);
  }
}

TEST_CASE("empty layout serializes to a valid empty document", "[layout]") {
  const ProfileLayout layout = render_flat(profile_of("nobody", {}));
  const std::string json_text = to_json(layout);
  CHECK(layout_from_json(json_text).entries.empty());
  const std::string html = to_html(layout);
  CHECK(html.find("<ul class=\"topics\">") != std::string::npos);
  CHECK(html.find("<!DOCTYPE html>") == 0);
}

TEST_CASE("layout json version and kinds are validated", "[layout]") {
  CHECK_THROWS_AS(layout_from_json("{\"layout_version\":2,\"mode\":\"flat\","
                                   "\"user_id\":\"u\",\"entries\":[]}"),
                  SchemaError);
  CHECK_THROWS_AS(layout_from_json("{\"layout_version\":1,\"mode\":\"spiral\","
                                   "\"user_id\":\"u\",\"entries\":[]}"),
                  SchemaError);
  CHECK_THROWS_AS(layout_from_json("{\"layout_version\":1,\"mode\":\"flat\","
                                   "\"user_id\":\"u\",\"entries\":[{\"kind\":"
                                   "\"banner\",\"label\":\"x\"}]}"),
                  SchemaError);
  CHECK_THROWS_AS(layout_from_json("not json"), SchemaError);
}

TEST_CASE("nested html lists each member once under its header", "[layout]") {
  const auto dir = test_support::fixtures_dir() / "jewellery";
  const CategoryGraph g = ingest_tsv(dir / "subject.tsv", dir / "broader.tsv");
  TopicProfile p = profile_of("amber", {{"dbr:Pearl", 3}, {"dbr:Necklace", 2},
                                        {"dbr:Emerald", 1}});
  const ClusterSet cs = generalize(g, p, {});
  const std::string html = to_html(render_nested(p, cs));
  CHECK(count_occurrences(html, "<summary>Jewellery</summary>") == 1);
  CHECK(count_occurrences(html, "<li>Pearl</li>") == 1);
  CHECK(count_occurrences(html, "<li>Necklace</li>") == 1);
  CHECK(count_occurrences(html, "<li>Emerald</li>") == 1);
  CHECK(html.find("<details class=\"cluster\">") != std::string::npos);
  // Collapsed by default: no `open` attribute anywhere.
  CHECK(html.find("<details open") == std::string::npos);
}

TEST_CASE("clustered html carries the more-link texts and the hidden members",
          "[layout]") {
  const auto [p, cs] = mockup_fixture();
  const std::string html = to_html(render_clustered(p, cs, 3));
  CHECK(html.find("and 2 more topics in Materials") != std::string::npos);
  CHECK(html.find("in category Jewellery") != std::string::npos);
  // All five Materials members are present in the document for reveal.
  for (const std::string label : {"Metal", "Glass", "Wool", "Plastic", "Ceramic"}) {
    CHECK(html.find("<li>" + label + "</li>") != std::string::npos);
  }
}

TEST_CASE("html escapes labels", "[layout]") {
  const auto p = profile_of("u<script>", {{"t:AT&T_<GmbH>", 1}});
  const std::string html = to_html(render_flat(p));
  CHECK(html.find("AT&amp;T &lt;GmbH&gt;") != std::string::npos);
  CHECK(html.find("u&lt;script&gt;") != std::string::npos);
  CHECK(html.find("<script>") == std::string::npos);
}

TEST_CASE("every profile topic is visible in nested and clustered outputs",
          "[layout]") {
  std::mt19937 rng(321);
  for (int trial = 0; trial < 30; ++trial) {
    // Random profile over a random graph; labels are unique by construction.
    GraphBuilder b;
    const int n_topics = std::uniform_int_distribution<int>(1, 15)(rng);
    const int n_categories = std::uniform_int_distribution<int>(1, 6)(rng);
    TopicProfile p;
    p.user_id = "u";
    for (int i = 0; i < n_topics; ++i) {
      const NodeId id = "t:topic" + std::to_string(i);
      p.weights[id] = std::uniform_int_distribution<std::uint32_t>(1, 4)(rng);
      const int fanout = std::uniform_int_distribution<int>(0, 2)(rng);
      for (int f = 0; f < fanout; ++f) {
        b.add_subject_edge(
            id, "c:cat" + std::to_string(
                              std::uniform_int_distribution<int>(0, n_categories - 1)(rng)));
      }
    }
    const CategoryGraph g = b.finalize();
    const ClusterSet cs = generalize(g, p, {});
    for (const ProfileLayout& layout :
         {render_nested(p, cs), render_clustered(p, cs, 2)}) {
      const std::string json_text = to_json(layout);
      const std::string html = to_html(layout);
      for (const auto& [id, weight] : p.weights) {
        const std::string label = local_name(id);
        CHECK(json_text.find("\"" + label + "\"") != std::string::npos);
        CHECK(html.find(">" + label + "<") != std::string::npos);
      }
    }
  }
}
