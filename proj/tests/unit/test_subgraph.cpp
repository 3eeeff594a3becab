#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "hetcond/graph_io.hpp"
#include "hetcond/subgraph.hpp"
#include "generators.hpp"

using namespace hetcond;

namespace {

/// Structural equality ignoring metadata (induction always attaches
/// provenance).
bool same_structure(const HeteroGraph& a, HeteroGraph b) {
  HeteroGraph a2 = a;
  a2.metadata = nlohmann::json();
  b.metadata = nlohmann::json();
  return graphs_equal(a2, b);
}

}  // namespace

TEST_CASE("keeping everything is the identity up to re-indexing") {
  HeteroGraph g = testgen::toy_graph();
  std::map<std::string, std::vector<index_t>> kept{
      {"P", {0, 1, 2, 3}}, {"A", {0, 1, 2}}, {"S", {0, 1}}};
  auto induced = induce_subgraph(g, kept);
  REQUIRE(same_structure(g, induced.graph));
  REQUIRE(induced.remap.kept.at("P") == std::vector<index_t>{0, 1, 2, 3});
}

TEST_CASE("only edges among kept nodes survive, re-indexed densely") {
  HeteroGraph g = testgen::toy_graph();
  std::map<std::string, std::vector<index_t>> kept{{"P", {0, 1}}, {"A", {1}}, {"S", {0}}};
  auto induced = induce_subgraph(g, kept);
  const Csr& pa = induced.graph.find_relation("PA")->adj;
  // Surviving PA edges: (P0,A1) and (P1,A1) -> new ids (0,0), (1,0).
  REQUIRE(pa.n_rows == 2);
  REQUIRE(pa.n_cols == 1);
  REQUIRE(pa.nnz() == 2);
  REQUIRE(pa.row(0)[0] == 0);
  REQUIRE(pa.row(1)[0] == 0);
  const Csr& ps = induced.graph.find_relation("PS")->adj;
  REQUIRE(ps.nnz() == 2);  // (P0,S0), (P1,S0)
  // Features follow the kept rows bit-exactly.
  REQUIRE(induced.graph.features.at("A").data == std::vector<double>{0, 2});
  REQUIRE(induced.graph.labels == std::vector<index_t>{0, 0});
  REQUIRE(induced.graph.train_ids == std::vector<index_t>{0, 1});
}

TEST_CASE("a hyper-node replaces its type with the member mean feature") {
  HeteroGraph g = testgen::toy_graph();
  HyperNode h;
  h.leaf_type = "S";
  h.id = 0;
  h.members = {0, 1};
  h.anchor_type = "P";
  h.anchor_id = 0;
  h.feature = {0.5, 0.5};  // mean of S features (1,0) and (0,1)
  h.father_links = {{"P", 0}, {"P", 1}};
  h.relation_edges = {{"PS", 0}, {"PS", 1}};
  std::map<std::string, std::vector<index_t>> kept{{"P", {0, 1}}, {"A", {0, 1, 2}}};
  auto induced = induce_subgraph(g, kept, {h});
  REQUIRE(induced.graph.type_count("S") == 1);
  REQUIRE(induced.graph.features.at("S").data == std::vector<double>{0.5, 0.5});
  const Csr& ps = induced.graph.find_relation("PS")->adj;
  REQUIRE(ps.n_cols == 1);
  REQUIRE(ps.nnz() == 2);  // both kept fathers point at the hyper-node
  REQUIRE(induced.remap.hyper.at("S").size() == 1);
}

TEST_CASE("kept ids and hyper-nodes for the same type conflict") {
  HeteroGraph g = testgen::toy_graph();
  HyperNode h;
  h.leaf_type = "S";
  h.members = {0};
  std::map<std::string, std::vector<index_t>> kept{
      {"P", {0}}, {"A", {0}}, {"S", {1}}};
  REQUIRE_THROWS_AS(induce_subgraph(g, kept, {h}), std::invalid_argument);
}

TEST_CASE("every type must be kept or synthesized") {
  HeteroGraph g = testgen::toy_graph();
  std::map<std::string, std::vector<index_t>> kept{{"P", {0}}, {"A", {0}}};
  REQUIRE_THROWS_AS(induce_subgraph(g, kept), std::invalid_argument);
}

TEST_CASE("induced edge counts never exceed the originals") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    testgen::RandomGraphOptions opts;
    opts.with_leaf = trial % 2 == 0;
    HeteroGraph g = testgen::random_hetero(rng, opts);
    std::map<std::string, std::vector<index_t>> kept;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (const auto& t : g.node_types) {
      std::vector<index_t> ids;
      for (index_t i = 0; i < t.count; ++i)
        if (coin(rng) < 0.6) ids.push_back(i);
      kept[t.name] = ids;
    }
    auto induced = induce_subgraph(g, kept);
    for (std::size_t r = 0; r < g.relations.size(); ++r)
      REQUIRE(induced.graph.relations[r].adj.nnz() <= g.relations[r].adj.nnz());
    REQUIRE(validate(induced.graph).ok());
  }
}

TEST_CASE("splits are filtered and remapped in order") {
  HeteroGraph g = testgen::toy_graph();
  g.train_ids = {3, 0};
  g.valid_ids = {1};
  g.test_ids = {2};
  std::map<std::string, std::vector<index_t>> kept{
      {"P", {0, 3}}, {"A", {0, 1, 2}}, {"S", {0, 1}}};
  auto induced = induce_subgraph(g, kept);
  REQUIRE(induced.graph.train_ids == std::vector<index_t>{1, 0});
  REQUIRE(induced.graph.valid_ids.empty());
  REQUIRE(induced.graph.test_ids.empty());
  REQUIRE(induced.graph.labels == std::vector<index_t>{0, 1});
}
