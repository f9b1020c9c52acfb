#include <doctest.h>

#include <algorithm>
#include <set>

#include "linktheft/dataset.hpp"
#include "linktheft/errors.hpp"
#include "linktheft/pairs.hpp"
#include "linktheft/rng.hpp"
#include "linktheft/toy.hpp"
#include "test_util.hpp"

using namespace linktheft;

namespace {

Dataset tiny_dataset(const std::string& edges, int attr_rows,
                     const std::string& labels, int num_classes,
                     std::vector<std::string>* warnings = nullptr) {
  testutil::TempDir dir("tiny");
  testutil::write_file(dir.file("edges.txt"), edges);
  std::string attrs;
  for (int i = 0; i < attr_rows; ++i)
    attrs += std::to_string(i) + ".0,1.0\n";
  testutil::write_file(dir.file("attrs.csv"), attrs);
  testutil::write_file(dir.file("labels.csv"), labels);
  return load_dataset(dir.file("edges.txt"), dir.file("attrs.csv"),
                      dir.file("labels.csv"), num_classes, "tiny", warnings);
}

}  // namespace

TEST_CASE("load_dataset builds the smallest undirected graph") {
  Dataset ds = tiny_dataset("0 1\n", 2, "0,0\n1,1\n", 2);
  CHECK(ds.node_count() == 2);
  REQUIRE(ds.graph.edges.size() == 1);
  CHECK(ds.graph.edges[0] == std::pair<int, int>{0, 1});
  CHECK(ds.attr_dim() == 2);
}

TEST_CASE("load_dataset deduplicates reversed duplicate edges") {
  Dataset ds = tiny_dataset("0 1\n1 0\n", 2, "0,0\n1,1\n", 2);
  CHECK(ds.graph.edges.size() == 1);
}

TEST_CASE("load_dataset rejects dangling node ids") {
  CHECK_THROWS_AS(tiny_dataset("0 5\n", 3, "0,0\n", 2), IntegrityError);
}

TEST_CASE("load_dataset drops self-loops with a warning") {
  std::vector<std::string> warnings;
  Dataset ds = tiny_dataset("0 1\n1 1\n", 2, "0,0\n1,1\n", 2, &warnings);
  CHECK(ds.graph.edges.size() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("self-loop") != std::string::npos);
}

TEST_CASE("load_dataset reports the offending line on parse errors") {
  try {
    tiny_dataset("0 1\n0 x\n", 2, "0,0\n", 2);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("sampling an unlabeled node is an integrity error") {
  Dataset ds = tiny_dataset("0 1\n", 2, "0,0\n", 2);  // node 1 unlabeled
  CHECK_THROWS_AS(sample_labeled_nodes(ds, 1.0, 0), IntegrityError);
}

TEST_CASE("meta.json attr_dim must match the attribute columns") {
  testutil::TempDir dir("meta");
  testutil::write_file(dir.file("edges.txt"), "0 1\n");
  testutil::write_file(dir.file("attrs.csv"), "1.0,0.0\n0.0,1.0\n");
  testutil::write_file(dir.file("labels.csv"), "0,0\n1,1\n");
  testutil::write_file(dir.file("meta.json"),
                       R"({"name":"m","num_classes":2,"attr_dim":9})");
  CHECK_THROWS_AS(load_bundle(dir.path().string()), IntegrityError);
}

TEST_CASE("bundle round trip reproduces the dataset exactly") {
  Dataset ds = planted_partition_dataset({.communities = 3,
                                          .community_size = 8,
                                          .p_in = 0.5,
                                          .p_out = 0.05,
                                          .seed = 7});
  testutil::TempDir dir("bundle");
  write_bundle(ds, dir.path().string());
  Dataset a = load_bundle(dir.path().string());
  Dataset b = load_bundle(dir.path().string());
  CHECK(a.graph == ds.graph);
  CHECK(a.labels == ds.labels);
  CHECK(a.attributes.data == ds.attributes.data);
  // Reloading is byte-deterministic.
  CHECK(a.graph == b.graph);
  CHECK(a.attributes.data == b.attributes.data);
}

TEST_CASE("sample_labeled_nodes") {
  Dataset ds = two_clique_dataset();

  SUBCASE("fraction 1.0 selects every node") {
    auto ids = sample_labeled_nodes(ds, 1.0, 1);
    CHECK(ids.size() == 8);
  }
  SUBCASE("deterministic per seed") {
    Dataset big = planted_partition_dataset(
        {.communities = 2, .community_size = 50, .seed = 3});
    auto a = sample_labeled_nodes(big, 0.1, 42);
    auto b = sample_labeled_nodes(big, 0.1, 42);
    auto c = sample_labeled_nodes(big, 0.1, 43);
    CHECK(a.size() == 10);
    CHECK(a == b);
    CHECK(a != c);
    std::set<int> unique(a.begin(), a.end());
    CHECK(unique.size() == a.size());
  }
  SUBCASE("floor arithmetic on a 2708-node dataset") {
    Dataset big;
    big.name = "floor";
    big.graph = Graph::from_edges(2708, {{0, 1}});
    big.attributes = Matrix(2708, 1);
    big.labels.assign(2708, 0);
    big.num_classes = 2;
    auto ids = sample_labeled_nodes(big, 0.1, 0);
    CHECK(ids.size() == 270);
  }
  SUBCASE("zero-node selections are a configuration error") {
    CHECK_THROWS_AS(sample_labeled_nodes(ds, 0.01, 0), ConfigError);
    CHECK_THROWS_AS(sample_labeled_nodes(ds, -0.5, 0), ConfigError);
    CHECK_THROWS_AS(sample_labeled_nodes(ds, 1.5, 0), ConfigError);
  }
}

TEST_CASE("build_attack_pairs") {
  SUBCASE("K3 has no negatives") {
    Graph k3 = Graph::from_edges(3, {{0, 1}, {0, 2}, {1, 2}});
    CHECK_THROWS_AS(build_attack_pairs(k3, 0), SamplingError);
  }
  SUBCASE("path 0-1-2 cannot balance 2 positives with 1 non-edge") {
    Graph path = Graph::from_edges(3, {{0, 1}, {1, 2}});
    CHECK_THROWS_AS(build_attack_pairs(path, 0), SamplingError);
  }
  SUBCASE("star on 5 nodes draws 4 distinct negatives from the 6 non-edges") {
    Graph star = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    // Brute-force oracle: enumerate the non-edges.
    std::set<std::pair<int, int>> non_edges;
    for (int u = 0; u < 5; ++u)
      for (int v = u + 1; v < 5; ++v)
        if (!star.has_edge(u, v)) non_edges.insert({u, v});
    CHECK(non_edges.size() == 6);

    AttackPairSet set = build_attack_pairs(star, 11);
    CHECK(set.positive_count() == 4);
    CHECK(set.negative_count() == 4);
    std::set<std::pair<int, int>> seen;
    for (const auto& p : set.pairs) {
      CHECK(p.u < p.v);
      CHECK(seen.insert({p.u, p.v}).second);  // no duplicates
      if (!p.linked) CHECK(non_edges.count({p.u, p.v}) == 1);
    }
    // Deterministic per seed.
    AttackPairSet again = build_attack_pairs(star, 11);
    REQUIRE(again.pairs.size() == set.pairs.size());
    for (size_t i = 0; i < set.pairs.size(); ++i) {
      CHECK(again.pairs[i].u == set.pairs[i].u);
      CHECK(again.pairs[i].v == set.pairs[i].v);
      CHECK(again.pairs[i].linked == set.pairs[i].linked);
    }
  }
  SUBCASE("balanced classes on random sparse graphs") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 20 + static_cast<int>(rng.below(30));
      std::vector<std::pair<int, int>> edges;
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
          if (rng.next_double() < 0.08) edges.emplace_back(u, v);
      Graph g = Graph::from_edges(n, edges);
      if (g.edge_count() == 0) continue;
      AttackPairSet set = build_attack_pairs(g, trial);
      CHECK(set.positive_count() == g.edge_count());
      CHECK(set.positive_count() == set.negative_count());
      std::set<std::pair<int, int>> seen;
      for (const auto& p : set.pairs) {
        CHECK(seen.insert({p.u, p.v}).second);
        CHECK(p.linked == g.has_edge(p.u, p.v));
      }
    }
  }
  SUBCASE("dense graph falls back to exhaustive enumeration") {
    // Nearly complete graph: rejection sampling alone would crawl.
    const int n = 40;
    std::vector<std::pair<int, int>> edges;
    int skipped = 0;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) {
        if ((u + v) % 3 == 0 && skipped < 300) {
          ++skipped;
          continue;
        }
        edges.emplace_back(u, v);
      }
    Graph g = Graph::from_edges(n, edges);
    const size_t non_edges = static_cast<size_t>(n) * (n - 1) / 2 - g.edge_count();
    if (non_edges >= g.edge_count()) {
      AttackPairSet set = build_attack_pairs(g, 1);
      CHECK(set.positive_count() == set.negative_count());
    } else {
      CHECK_THROWS_AS(build_attack_pairs(g, 1), SamplingError);
    }
  }
}

TEST_CASE("split_pairs") {
  Graph star = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  AttackPairSet set = build_attack_pairs(star, 3);
  REQUIRE(set.pairs.size() == 8);

  SUBCASE("half split -> 4 train, 4 test; deterministic") {
    split_pairs(set, 0.5, 9);
    CHECK(set.train_pairs().size() == 4);
    CHECK(set.test_pairs().size() == 4);
    AttackPairSet again = build_attack_pairs(star, 3);
    split_pairs(again, 0.5, 9);
    for (size_t i = 0; i < set.pairs.size(); ++i)
      CHECK(set.pairs[i].split == again.pairs[i].split);
  }
  SUBCASE("train and test partition the set") {
    split_pairs(set, 0.5, 1);
    CHECK(set.train_pairs().size() + set.test_pairs().size() ==
          set.pairs.size());
  }
  SUBCASE("fraction 0.2 over 10 pairs -> 2 train") {
    Graph g = Graph::from_edges(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}});
    AttackPairSet ten = build_attack_pairs(g, 0);
    REQUIRE(ten.pairs.size() == 10);
    split_pairs(ten, 0.2, 0);
    CHECK(ten.train_pairs().size() == 2);
    CHECK(ten.test_pairs().size() == 8);
  }
  SUBCASE("bad fractions are configuration errors") {
    CHECK_THROWS_AS(split_pairs(set, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(split_pairs(set, 1.0, 0), ConfigError);
  }
  SUBCASE("train positives form a valid partial graph") {
    split_pairs(set, 0.5, 2);
    PartialGraph pg = set.train_partial_graph();
    pg.validate_against(star);  // every edge is a real edge
  }
}
