#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hetcond/ppr.hpp"
#include "generators.hpp"
#include "oracle.hpp"

using namespace hetcond;

namespace {

Csr random_sym_normalized(std::mt19937_64& rng, index_t n, double avg_deg) {
  std::vector<std::pair<index_t, index_t>> edges;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  double p = std::min(1.0, avg_deg / static_cast<double>(n));
  for (index_t i = 0; i < n; ++i)
    for (index_t j = i + 1; j < n; ++j)
      if (coin(rng) < p) {
        edges.emplace_back(i, j);
        edges.emplace_back(j, i);
      }
  Csr a = Csr::from_coo(n, n, std::move(edges));
  // Symmetric normalization of a square matrix: row sums equal column sums.
  return a.sym_bipartite_normalized();
}

ComposedAdjacency sym_composed(Csr b) {
  ComposedAdjacency ca;
  ca.path.types = {"T", "S"};
  ca.path.steps = {{"TS", false}};
  ca.matrix = b.sym_bipartite_normalized();
  ca.norm = Norm::sym_bipartite;
  return ca;
}

}  // namespace

TEST_CASE("zero adjacency gives alpha times identity") {
  Csr zero(5, 5);
  auto row = ppr_row(zero, 2, 0.15, 1e-6, PprMode::exact);
  for (index_t i = 0; i < 5; ++i)
    REQUIRE_THAT(row[i], Catch::Matchers::WithinAbs(i == 2 ? 0.15 : 0.0, 1e-12));

  // The restricted block of a zero bipartite lift is all zero.
  auto im = ppr_influence(sym_composed(Csr(3, 2)), 0.15, 1e-6, PprMode::exact);
  REQUIRE(im.matrix.nnz() == 0);
}

TEST_CASE("two-node pair matches the closed form") {
  // S = [[0,1],[1,0]]; alpha*(I-(1-a)S)^{-1} = a/(1-(1-a)^2) * [[1,1-a],[1-a,1]]
  Csr pair = Csr::from_coo(2, 2, {{0, 1}, {1, 0}});
  for (double alpha : {0.15, 0.5}) {
    double scale = alpha / (1.0 - (1.0 - alpha) * (1.0 - alpha));
    for (PprMode mode : {PprMode::exact, PprMode::push}) {
      auto row = ppr_row(pair, 0, alpha, 1e-8, mode);
      REQUIRE_THAT(row[0], Catch::Matchers::WithinAbs(scale, 1e-6));
      REQUIRE_THAT(row[1], Catch::Matchers::WithinAbs(scale * (1.0 - alpha), 1e-6));
    }
  }

  // Same pair seen as the lift of a 1x1 bipartite block.
  auto im = ppr_influence(sym_composed(Csr::from_coo(1, 1, {{0, 0}})), 0.15, 1e-8,
                          PprMode::exact);
  double scale = 0.15 / (1.0 - 0.85 * 0.85);
  REQUIRE(im.matrix.nnz() == 1);
  REQUIRE_THAT(im.matrix.vals[0], Catch::Matchers::WithinAbs(scale * 0.85, 1e-9));
}

TEST_CASE("push mode stays within epsilon of the exact solve") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 5; ++trial) {
    Csr s = random_sym_normalized(rng, 50, 4.0);
    double eps = 1e-4;
    for (index_t seed : {index_t(0), index_t(17), index_t(49)}) {
      auto push = ppr_row(s, seed, 0.15, eps, PprMode::push);
      auto exact = ppr_row(s, seed, 0.15, eps, PprMode::exact);
      for (index_t i = 0; i < 50; ++i)
        REQUIRE_THAT(push[i], Catch::Matchers::WithinAbs(exact[i], eps));
    }
  }
}

TEST_CASE("exact mode matches the dense inverse oracle including row sums") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 5; ++trial) {
    Csr s = random_sym_normalized(rng, 30, 3.0);
    auto dense = oracle::dense_ppr(testgen::to_dense_values(s), 0.15);
    for (index_t seed = 0; seed < 30; seed += 7) {
      auto row = ppr_row(s, seed, 0.15, 1e-8, PprMode::exact);
      double row_sum = 0.0, want_sum = 0.0;
      for (index_t j = 0; j < 30; ++j) {
        REQUIRE_THAT(row[j], Catch::Matchers::WithinAbs(dense[seed][j], 1e-9));
        row_sum += row[j];
        want_sum += dense[seed][j];
      }
      REQUIRE_THAT(row_sum, Catch::Matchers::WithinAbs(want_sum, 1e-9));
    }
  }
}

TEST_CASE("influence matrix entries are non-negative and bounded by path count") {
  std::mt19937_64 rng(59);
  std::vector<InfluenceMatrix> mats;
  Csr b1 = testgen::random_bipartite(rng, 8, 6, 2.0);
  Csr b2 = testgen::random_bipartite(rng, 8, 6, 2.0);
  for (const Csr* b : {&b1, &b2})
    mats.push_back(ppr_influence(sym_composed(*b), 0.15, 1e-5, PprMode::push));
  auto total = sum_influence(mats);
  for (double v : total.matrix.vals) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 2.0);  // L = 2 summed meta-paths
  }
}

TEST_CASE("restricting rows computes only those rows") {
  std::mt19937_64 rng(61);
  Csr b = testgen::random_bipartite(rng, 6, 5, 2.0);
  std::vector<index_t> rows = {1, 4};
  auto im = ppr_influence(sym_composed(b), 0.15, 1e-6, PprMode::push, rows);
  REQUIRE(im.matrix.row_nnz(0) == 0);
  REQUIRE(im.matrix.row_nnz(2) == 0);
  auto full = ppr_influence(sym_composed(b), 0.15, 1e-6, PprMode::push);
  for (index_t r : rows) {
    REQUIRE(im.matrix.row_nnz(r) == full.matrix.row_nnz(r));
    for (index_t p = im.matrix.row_ptr[r]; p < im.matrix.row_ptr[r + 1]; ++p)
      REQUIRE(im.matrix.vals[p] == full.matrix.vals[p - im.matrix.row_ptr[r] + full.matrix.row_ptr[r]]);
  }
}

TEST_CASE("parameter validation") {
  Csr b = Csr::from_coo(2, 2, {{0, 0}});
  auto ca = sym_composed(b);
  REQUIRE_THROWS_AS(ppr_influence(ca, 1.5, 1e-4, PprMode::push), std::invalid_argument);
  REQUIRE_THROWS_AS(ppr_influence(ca, 0.15, -1.0, PprMode::push), std::invalid_argument);
  ca.norm = Norm::none;
  REQUIRE_THROWS_AS(ppr_influence(ca, 0.15, 1e-4, PprMode::push), std::invalid_argument);
}
