#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "hetcond/aux_condense.hpp"
#include "generators.hpp"
#include "oracle.hpp"

using namespace hetcond;

namespace {

std::vector<ComposedAdjacency> father_paths(const HeteroGraph& g, const std::string& father,
                                            int hops) {
  std::vector<ComposedAdjacency> out;
  for (const auto& p : enumerate_metapaths(g, g.target_type, hops))
    if (p.src_type() == father) out.push_back(compose(g, p, Norm::sym_bipartite));
  return out;
}

}  // namespace

TEST_CASE("a kept target's only father neighbor ranks first") {
  HeteroGraph g;
  g.node_types = {{"P", 3}, {"A", 3}};
  g.target_type = "P";
  g.relations.push_back({"PA", "P", "A", Csr::from_coo(3, 3, {{0, 1}, {1, 0}, {1, 2}, {2, 0}})});
  g.labels = {0, 0, 0};
  auto h = classify_hierarchy(g);
  std::vector<index_t> kept = {0};
  auto sel = select_father(g, h, father_paths(g, "A", 1), kept, 1);
  REQUIRE(sel.ranked == std::vector<index_t>{1});
}

TEST_CASE("toy father ranking matches the dense PPR oracle") {
  HeteroGraph g = testgen::toy_graph();
  auto h = classify_hierarchy(g);
  std::vector<index_t> kept = {0, 1};
  auto paths = father_paths(g, "A", 2);
  REQUIRE(paths.size() == 1);  // only P<-A reaches A within 2 hops
  auto sel = select_father(g, h, paths, kept, 2);

  // Oracle: dense 7-node lift of PA, direct inversion, column sums over
  // the kept target rows.
  auto lift = oracle::sym_normalize(oracle::bipartite_lift(
      testgen::to_dense_values(g.find_relation("PA")->adj)));
  auto dense = oracle::dense_ppr(lift, 0.15);
  std::vector<double> score(3, 0.0);
  for (index_t t : kept)
    for (index_t a = 0; a < 3; ++a) score[a] += dense[t][4 + a];
  std::vector<index_t> order = {0, 1, 2};
  auto deg = g.type_degrees("A");
  std::sort(order.begin(), order.end(), [&](index_t x, index_t y) {
    if (score[x] != score[y]) return score[x] > score[y];
    if (deg[x] != deg[y]) return deg[x] > deg[y];
    return x < y;
  });
  REQUIRE(sel.ranked == std::vector<index_t>(order.begin(), order.begin() + 2));
  for (std::size_t i = 0; i < sel.ranked.size(); ++i)
    REQUIRE_THAT(sel.scores[i], Catch::Matchers::WithinAbs(score[order[i]], 2e-4));
}

TEST_CASE("full father budget keeps everyone, ordered by score") {
  HeteroGraph g = testgen::toy_graph();
  auto h = classify_hierarchy(g);
  std::vector<index_t> kept = {0, 1, 2, 3};
  auto sel = select_father(g, h, father_paths(g, "A", 2), kept, 3);
  REQUIRE(sel.ranked.size() == 3);
  std::set<index_t> unique(sel.ranked.begin(), sel.ranked.end());
  REQUIRE(unique.size() == 3);
  for (std::size_t i = 1; i < sel.scores.size(); ++i)
    REQUIRE(sel.scores[i - 1] >= sel.scores[i]);
}

TEST_CASE("budget above the father population violates the contract") {
  HeteroGraph g = testgen::toy_graph();
  auto h = classify_hierarchy(g);
  REQUIRE_THROWS_AS(select_father(g, h, father_paths(g, "A", 2), std::vector<index_t>{0}, 4),
                    std::invalid_argument);
}

TEST_CASE("degree importance changes only the ranking") {
  HeteroGraph g = testgen::toy_graph();
  auto h = classify_hierarchy(g);
  std::vector<index_t> kept = {0, 1};
  auto paths = father_paths(g, "A", 2);
  auto by_ppr = select_father(g, h, paths, kept, 2);
  auto by_degree = select_father(g, h, paths, kept, 2, 0.15, 1e-4, PprMode::push, 1,
                                 ImportanceMeasure::degree);
  REQUIRE(by_ppr.ranked.size() == by_degree.ranked.size());
  auto deg = g.type_degrees("A");
  REQUIRE(deg[by_degree.ranked[0]] >= deg[by_degree.ranked[1]]);
}

TEST_CASE("two fathers sharing a leaf produce mutually linked hyper-nodes") {
  HeteroGraph g = testgen::fig7_graph();
  auto h = classify_hierarchy(g);
  std::map<std::string, std::vector<index_t>> kept{{"F", {0, 1}}};
  auto syn = synthesize_leaf(g, h, "L", kept, 2);
  REQUIRE(syn.hyper.size() == 2);

  const HyperNode& h0 = syn.hyper[0];
  const HyperNode& h1 = syn.hyper[1];
  REQUIRE(h0.anchor_id == 0);
  REQUIRE(h0.members == std::vector<index_t>{0, 1});
  REQUIRE(h1.anchor_id == 1);
  REQUIRE(h1.members == std::vector<index_t>{1, 2});

  // Both hyper-nodes connect to both fathers through the shared leaf L1.
  for (const HyperNode* hn : {&h0, &h1}) {
    std::set<index_t> fathers;
    for (auto& [type, id] : hn->father_links) fathers.insert(id);
    REQUIRE(fathers == std::set<index_t>{0, 1});
  }

  // Features are member means: L0=(1,0), L1=(0,1), L2=(1,1).
  REQUIRE(h0.feature == std::vector<double>{0.5, 0.5});
  REQUIRE(h1.feature == std::vector<double>{0.5, 1.0});
}

TEST_CASE("single father with two leaves averages their features") {
  HeteroGraph g = testgen::fig7_graph();
  auto h = classify_hierarchy(g);
  std::map<std::string, std::vector<index_t>> kept{{"F", {0}}};
  auto syn = synthesize_leaf(g, h, "L", kept, 2);
  REQUIRE(syn.hyper.size() == 1);
  REQUIRE(syn.hyper[0].feature == std::vector<double>{0.5, 0.5});
}

TEST_CASE("disjoint groups merge under a budget of one") {
  HeteroGraph g = testgen::fig7_graph();
  // Remove the shared leaf edge: F0-{L0}, F1-{L2}.
  g.relations[1].adj = Csr::from_coo(2, 3, {{0, 0}, {1, 2}});
  auto h = classify_hierarchy(g);
  std::map<std::string, std::vector<index_t>> kept{{"F", {0, 1}}};
  auto syn = synthesize_leaf(g, h, "L", kept, 1);
  REQUIRE(syn.hyper.size() == 1);
  REQUIRE(syn.hyper[0].members == std::vector<index_t>{0, 2});
  // Mean over the union of members: ((1,0)+(1,1))/2.
  REQUIRE(syn.hyper[0].feature == std::vector<double>{1.0, 0.5});
  std::set<index_t> fathers;
  for (auto& [type, id] : syn.hyper[0].father_links) fathers.insert(id);
  REQUIRE(fathers == std::set<index_t>{0, 1});
  REQUIRE(syn.merges.size() == 1);
}

TEST_CASE("leaf with no kept-father edges warns and produces nothing") {
  HeteroGraph g = testgen::fig7_graph();
  g.relations[1].adj = Csr(2, 3);
  auto h = classify_hierarchy(g);
  std::map<std::string, std::vector<index_t>> kept{{"F", {0, 1}}};
  auto syn = synthesize_leaf(g, h, "L", kept, 1);
  REQUIRE(syn.hyper.empty());
  REQUIRE(syn.no_anchor_warning);
}

TEST_CASE("condense_other_types honors per-type budgets") {
  SECTION("toy at half ratio selects fathers only") {
    HeteroGraph g = testgen::toy_graph();
    auto h = classify_hierarchy(g);
    std::vector<index_t> kept = {0, 2};
    auto plan = condense_other_types(g, h, kept, 0.5);
    REQUIRE(plan.kept.at("A").size() == 2);  // ceil(0.5*3)
    REQUIRE(plan.kept.at("S").size() == 1);  // ceil(0.5*2)
    REQUIRE(plan.hyper.empty());
  }

  SECTION("full ratio keeps every node") {
    HeteroGraph g = testgen::chain_graph();
    auto h = classify_hierarchy(g);
    std::vector<index_t> kept = {0, 1, 2, 3};
    auto plan = condense_other_types(g, h, kept, 1.0);
    REQUIRE(plan.kept.at("A").size() == 3);
    REQUIRE(plan.kept.at("T").size() == 5);
    REQUIRE(plan.hyper.empty());
    for (auto& tc : plan.types) REQUIRE(tc.full_budget);
  }

  SECTION("chain at half ratio synthesizes the leaf type") {
    HeteroGraph g = testgen::chain_graph();
    auto h = classify_hierarchy(g);
    std::vector<index_t> kept = {0, 1, 2, 3};
    auto plan = condense_other_types(g, h, kept, 0.5);
    REQUIRE(plan.kept.at("A").size() == 2);
    REQUIRE(plan.kept.count("T") == 0);
    REQUIRE(static_cast<index_t>(plan.hyper.size()) <= 3);  // ceil(0.5*5)
    REQUIRE_FALSE(plan.hyper.empty());
    for (const auto& hn : plan.hyper) REQUIRE(hn.leaf_type == "T");
  }
}

TEST_CASE("merged memberships keep exact mean features") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 15; ++trial) {
    testgen::RandomGraphOptions opts;
    opts.with_leaf = true;
    HeteroGraph g = testgen::random_hetero(rng, opts);
    auto h = classify_hierarchy(g);
    std::vector<index_t> kept_t;
    for (index_t i = 0; i < g.type_count("P"); i += 2) kept_t.push_back(i);
    auto plan = condense_other_types(g, h, kept_t, 0.34);
    const FeatureMatrix& fm = g.features.at("T");
    for (const auto& hn : plan.hyper) {
      std::vector<double> mean(fm.n_cols, 0.0);
      for (index_t m : hn.members)
        for (index_t c = 0; c < fm.n_cols; ++c) mean[c] += fm.row(m)[c];
      for (auto& v : mean) v /= static_cast<double>(hn.members.size());
      REQUIRE(hn.feature == mean);
    }
  }
}
