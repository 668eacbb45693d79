#include "topigen/ingest.hpp"

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <sstream>
#include <vector>

using namespace topigen;
using test_support::TempDir;

TEST_CASE("tsv ingest builds the pearl graph", "[graph]") {
  TempDir dir;
  const auto subject = dir.file("s.tsv", "dbr:Pearl\tdbc:Gemstones\n");
  const auto broader = dir.file("b.tsv", "dbc:Gemstones\tdbc:Minerals\n");
  IngestStats stats;
  const CategoryGraph g = ingest_tsv(subject, broader, std::nullopt, &stats);

  CHECK(g.article_count() == 1);
  CHECK(g.category_count() == 2);
  CHECK(g.subject_edge_count() == 1);
  CHECK(g.broader_edge_count() == 1);
  CHECK(stats.articles == 1);
  CHECK(stats.categories == 2);
  CHECK(g.kind("dbr:Pearl") == NodeKind::article);
  CHECK(g.kind("dbc:Gemstones") == NodeKind::category);
}

TEST_CASE("tsv ingest of empty files yields an empty graph", "[graph]") {
  TempDir dir;
  const auto subject = dir.file("s.tsv", "");
  const auto broader = dir.file("b.tsv", "");
  IngestStats stats;
  const CategoryGraph g = ingest_tsv(subject, broader, std::nullopt, &stats);
  CHECK(g.node_count() == 0);
  CHECK(stats.duplicates_dropped == 0);
}

TEST_CASE("duplicate edge lines collapse and are counted", "[graph]") {
  TempDir dir;
  const auto subject =
      dir.file("s.tsv", "dbr:Pearl\tdbc:Gemstones\ndbr:Pearl\tdbc:Gemstones\n");
  const auto broader = dir.file("b.tsv", "");
  IngestStats stats;
  const CategoryGraph g = ingest_tsv(subject, broader, std::nullopt, &stats);
  CHECK(g.subject_edge_count() == 1);
  CHECK(stats.duplicates_dropped == 1);

  const auto once = dir.file("s1.tsv", "dbr:Pearl\tdbc:Gemstones\n");
  CHECK(g == ingest_tsv(once, broader));
}

TEST_CASE("comment lines and blank lines are skipped", "[graph]") {
  TempDir dir;
  const auto subject =
      dir.file("s.tsv", "# articles to categories\n\ndbr:Pearl\tdbc:Gemstones\n");
  const auto broader = dir.file("b.tsv", "");
  CHECK(ingest_tsv(subject, broader).subject_edge_count() == 1);
}

TEST_CASE("malformed tsv line reports file and line number", "[graph]") {
  TempDir dir;
  const auto subject = dir.file("s.tsv", "dbr:Pearl\tdbc:Gemstones\nonly-one-field\n");
  const auto broader = dir.file("b.tsv", "");
  try {
    ingest_tsv(subject, broader);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("s.tsv:2") != std::string::npos);
  }

  const auto three = dir.file("s3.tsv", "a\tb\tc\n");
  CHECK_THROWS_AS(ingest_tsv(three, broader), ParseError);
}

TEST_CASE("subject parent reused as article is a classification conflict", "[graph]") {
  TempDir dir;
  const auto subject = dir.file("s.tsv", "dbr:A\tdbc:B\ndbc:B\tdbc:C\n");
  const auto broader = dir.file("b.tsv", "");
  CHECK_THROWS_AS(ingest_tsv(subject, broader), ClassificationError);

  // Same conflict when the article shows up as a broader endpoint.
  const auto subject2 = dir.file("s2.tsv", "dbr:A\tdbc:B\n");
  const auto broader2 = dir.file("b2.tsv", "dbr:A\tdbc:C\n");
  CHECK_THROWS_AS(ingest_tsv(subject2, broader2), ClassificationError);
}

TEST_CASE("labels are stored and fall back to local names", "[graph]") {
  TempDir dir;
  const auto subject = dir.file("s.tsv", "dbr:Pearl_oyster\tdbc:Edible_molluscs\n");
  const auto broader = dir.file("b.tsv", "");
  const auto labels = dir.file("l.tsv", "dbr:Pearl_oyster\tPearl oyster (animal)\n"
                                        "dbr:Unknown_node\tIgnored\n");
  IngestStats stats;
  const CategoryGraph g = ingest_tsv(subject, broader, labels, &stats);
  CHECK(g.label("dbr:Pearl_oyster") == "Pearl oyster (animal)");
  CHECK(g.label("dbc:Edible_molluscs") == "Edible molluscs");
  CHECK(g.label("http://dbpedia.org/resource/Category:Gemstones") == "Gemstones");
  CHECK(stats.labels == 1);
}

TEST_CASE("parents and broaders", "[graph]") {
  TempDir dir;
  const auto subject = dir.file("s.tsv", "dbr:Pearl\tdbc:Gemstones\n");
  const auto broader = dir.file("b.tsv", "dbc:Gemstones\tdbc:Minerals\n"
                                         "dbc:Minerals\tdbc:Materials\n");
  const CategoryGraph g = ingest_tsv(subject, broader);

  CHECK(g.parents("dbr:Pearl") == std::vector<NodeId>{"dbc:Gemstones"});
  CHECK(g.broaders("dbc:Gemstones") == std::vector<NodeId>{"dbc:Minerals"});
  CHECK(g.parents("dbr:Nope").empty());
  CHECK(g.broaders("dbr:Nope").empty());
  CHECK(g.parents("dbc:Gemstones").empty());  // categories have no subject edges
  CHECK(g.broaders("dbr:Pearl").empty());
}

TEST_CASE("broader cycles are allowed and preserved", "[graph]") {
  TempDir dir;
  const auto subject = dir.file("s.tsv", "dbr:X\tdbc:C1\n");
  const auto broader = dir.file("b.tsv", "dbc:C1\tdbc:C2\ndbc:C2\tdbc:C1\ndbc:C2\tdbc:C2\n");
  const CategoryGraph g = ingest_tsv(subject, broader);
  CHECK(g.broaders("dbc:C2") == std::vector<NodeId>{"dbc:C1", "dbc:C2"});
  CHECK(g.broaders("dbc:C1") == std::vector<NodeId>{"dbc:C2"});
}

TEST_CASE("ingestion is order independent", "[graph]") {
  const std::vector<std::string> subject_lines = {
      "dbr:Pearl\tdbc:Gemstones", "dbr:Emerald\tdbc:Gemstones",
      "dbr:Necklace\tdbc:Jewellery", "dbr:Pearl\tdbc:Jewellery"};
  const std::vector<std::string> broader_lines = {
      "dbc:Gemstones\tdbc:Minerals", "dbc:Minerals\tdbc:Materials",
      "dbc:Jewellery\tdbc:Fashion", "dbc:Fashion\tdbc:Culture"};

  auto build = [](std::vector<std::string> s, std::vector<std::string> b) {
    TempDir dir;
    std::string sc, bc;
    for (const auto& l : s) sc += l + "\n";
    for (const auto& l : b) bc += l + "\n";
    return ingest_tsv(dir.file("s.tsv", sc), dir.file("b.tsv", bc));
  };

  const CategoryGraph reference = build(subject_lines, broader_lines);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = subject_lines;
    auto b = broader_lines;
    std::shuffle(s.begin(), s.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    CHECK(build(s, b) == reference);
  }
}

TEST_CASE("ntriples subset consumes subject and broader triples", "[graph]") {
  TempDir dir;
  const std::string nt =
      "<http://dbpedia.org/resource/Pearl> <http://purl.org/dc/terms/subject> "
      "<http://dbpedia.org/resource/Category:Gemstones> .\n";
  IngestStats stats;
  const CategoryGraph g = ingest_ntriples_subset(dir.file("d.nt", nt), &stats);
  CHECK(g.subject_edge_count() == 1);
  CHECK(g.parents("http://dbpedia.org/resource/Pearl") ==
        std::vector<NodeId>{"http://dbpedia.org/resource/Category:Gemstones"});
  CHECK(stats.triples_skipped == 0);
}

TEST_CASE("ntriples skips foreign predicates and counts them", "[graph]") {
  TempDir dir;
  const std::string nt =
      "<http://x/a> <http://www.w3.org/2000/01/rdf-schema#label> \"A label\"@en .\n";
  IngestStats stats;
  const CategoryGraph g = ingest_ntriples_subset(dir.file("d.nt", nt), &stats);
  CHECK(g.node_count() == 0);
  CHECK(stats.triples_skipped == 1);
  CHECK(stats.invalid_skipped == 0);
}

TEST_CASE("ntriples mixed file counts edges and skips", "[graph]") {
  const auto path = test_support::fixtures_dir() / "pearl" / "pearl.nt";
  IngestStats stats;
  const CategoryGraph g = ingest_ntriples_subset(path, &stats);
  CHECK(g.subject_edge_count() == 2);
  CHECK(g.broader_edge_count() == 1);
  CHECK(stats.triples_skipped == 3);
}

TEST_CASE("invalid retained triple is a parse error with line number", "[graph]") {
  TempDir dir;
  SECTION("missing terminal dot") {
    const auto p = dir.file(
        "d.nt", "<http://x/a> <http://purl.org/dc/terms/subject> <http://x/b>\n");
    try {
      ingest_ntriples_subset(p);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
  }
  SECTION("unterminated object IRI") {
    const auto p = dir.file(
        "d.nt", "<http://x/a> <http://www.w3.org/2004/02/skos/core#broader> <http://x/b .\n");
    CHECK_THROWS_AS(ingest_ntriples_subset(p), ParseError);
  }
  SECTION("literal object on an edge predicate") {
    const auto p = dir.file(
        "d.nt", "<http://x/a> <http://purl.org/dc/terms/subject> \"nope\" .\n");
    CHECK_THROWS_AS(ingest_ntriples_subset(p), ParseError);
  }
}

TEST_CASE("invalid skipped triple only bumps the warning counter", "[graph]") {
  TempDir dir;
  const std::string nt =
      "<http://x/a> <http://x/other> <http://x/b\n"   // unterminated, foreign predicate
      "this is not a triple at all\n"
      "<http://x/a> <http://purl.org/dc/terms/subject> <http://x/b> .\n";
  IngestStats stats;
  const CategoryGraph g = ingest_ntriples_subset(dir.file("d.nt", nt), &stats);
  CHECK(g.subject_edge_count() == 1);
  CHECK(stats.invalid_skipped == 2);
}

TEST_CASE("tsv and ntriples ingestion agree on equivalent content", "[graph]") {
  TempDir dir;
  const std::string subject_tsv =
      "http://x/Pearl\thttp://x/Category:Gemstones\n"
      "http://x/Emerald\thttp://x/Category:Gemstones\n";
  const std::string broader_tsv = "http://x/Category:Gemstones\thttp://x/Category:Minerals\n";
  const std::string nt =
      "<http://x/Emerald> <http://purl.org/dc/terms/subject> <http://x/Category:Gemstones> .\n"
      "<http://x/Category:Gemstones> <http://www.w3.org/2004/02/skos/core#broader> "
      "<http://x/Category:Minerals> .\n"
      "<http://x/Pearl> <http://purl.org/dc/terms/subject> <http://x/Category:Gemstones> .\n";
  const CategoryGraph a =
      ingest_tsv(dir.file("s.tsv", subject_tsv), dir.file("b.tsv", broader_tsv));
  const CategoryGraph b = ingest_ntriples_subset(dir.file("d.nt", nt));
  CHECK(a == b);
}

TEST_CASE("a node is never its own parent without a self-edge in the input", "[graph]") {
  TempDir dir;
  const auto subject = dir.file("s.tsv", "dbr:A\tdbc:B\n");
  const auto broader = dir.file("b.tsv", "dbc:B\tdbc:C\n");
  const CategoryGraph g = ingest_tsv(subject, broader);
  for (const NodeId& a : g.articles()) {
    const auto ps = g.parents(a);
    CHECK(std::find(ps.begin(), ps.end(), a) == ps.end());
  }
  for (const NodeId& c : g.categories()) {
    const auto bs = g.broaders(c);
    CHECK(std::find(bs.begin(), bs.end(), c) == bs.end());
  }
}
