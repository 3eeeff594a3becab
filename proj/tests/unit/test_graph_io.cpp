#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "hetcond/graph_io.hpp"
#include "generators.hpp"

namespace fs = std::filesystem;
using namespace hetcond;

namespace {

fs::path fixture(const std::string& name) { return fs::path(HETCOND_FIXTURE_DIR) / name; }

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("hetcond_io_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

}  // namespace

TEST_CASE("toy fixture loads with expected counts") {
  HeteroGraph g = load_graph(fixture("toy"));
  REQUIRE(g.type_count("P") == 4);
  REQUIRE(g.type_count("A") == 3);
  REQUIRE(g.type_count("S") == 2);
  REQUIRE(g.target_type == "P");
  REQUIRE(g.relations.size() == 2);
  REQUIRE(g.find_relation("PA")->adj.nnz() == 6);
  REQUIRE(g.find_relation("PS")->adj.nnz() == 4);
  REQUIRE(g.labels == std::vector<index_t>{0, 0, 1, 1});
  REQUIRE(g.train_ids.size() == 4);
  REQUIRE(validate(g).ok());
  // In-memory builder mirrors the on-disk fixture.
  REQUIRE(graphs_equal(g, testgen::toy_graph()));
}

TEST_CASE("missing schema is a fatal load error") {
  auto dir = temp_dir("noschema");
  REQUIRE_THROWS_WITH(load_graph(dir), Catch::Matchers::ContainsSubstring("schema"));
}

TEST_CASE("declared relation without edge file names the relation") {
  auto dir = temp_dir("missingrel");
  write(dir / "schema", "type P 2\ntype A 2\ntarget P\nrelation PA P A\n");
  REQUIRE_THROWS_WITH(load_graph(dir), Catch::Matchers::ContainsSubstring("PA"));
}

TEST_CASE("empty edge file yields a zero-entry adjacency") {
  auto dir = temp_dir("emptyrel");
  write(dir / "schema", "type P 2\ntype A 2\ntarget P\nrelation PA P A\n");
  write(dir / "PA.edges", "");
  write(dir / "labels", "0 0\n1 1\n");
  HeteroGraph g = load_graph(dir);
  REQUIRE(g.find_relation("PA")->adj.nnz() == 0);
}

TEST_CASE("out-of-range edge id names relation and line") {
  auto dir = temp_dir("oob");
  write(dir / "schema", "type P 2\ntype A 2\ntarget P\nrelation PA P A\n");
  write(dir / "PA.edges", "0 0\n1 7\n");
  REQUIRE_THROWS_WITH(load_graph(dir), Catch::Matchers::ContainsSubstring("PA") &&
                                           Catch::Matchers::ContainsSubstring("line 2"));
}

TEST_CASE("feature dimension mismatch is a load error") {
  auto dir = temp_dir("featdim");
  write(dir / "schema", "type P 2\ntarget P\n");
  write(dir / "labels", "0 0\n");
  write(dir / "P.features", "3 1\n1\n2\n3\n");
  REQUIRE_THROWS_WITH(load_graph(dir), Catch::Matchers::ContainsSubstring("features"));
}

TEST_CASE("validate reports out-of-range and dimension issues") {
  HeteroGraph g = testgen::toy_graph();
  REQUIRE(validate(g).ok());

  SECTION("edge column beyond type count") {
    // Hand-corrupt the PA adjacency: A-index 7 with N_A = 3.
    g.relations[0].adj.col_idx[1] = 7;
    auto rep = validate(g);
    REQUIRE(rep.issues.size() == 1);
    REQUIRE_THAT(rep.issues[0].message, Catch::Matchers::ContainsSubstring("out-of-range"));
    REQUIRE_THAT(rep.issues[0].where, Catch::Matchers::ContainsSubstring("PA"));
  }

  SECTION("feature row count mismatch") {
    g.features["P"].n_rows = 5;
    g.features["P"].data.resize(10, 0.0);
    auto rep = validate(g);
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (auto& i : rep.issues)
      found |= i.message.find("5 rows") != std::string::npos;
    REQUIRE(found);
  }

  SECTION("duplicate relation name") {
    g.relations.push_back(g.relations[0]);
    REQUIRE_FALSE(validate(g).ok());
  }

  SECTION("non-finite feature") {
    g.features["A"].data[0] = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_FALSE(validate(g).ok());
  }
}

TEST_CASE("save then load round-trips structurally") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 8; ++trial) {
    testgen::RandomGraphOptions opts;
    opts.with_leaf = trial % 2 == 1;
    HeteroGraph g = testgen::random_hetero(rng, opts);
    g.valid_ids = {0};
    g.test_ids = {1, 2};
    auto dir = temp_dir("roundtrip" + std::to_string(trial));
    save_graph(g, dir);
    HeteroGraph back = load_graph(dir);
    REQUIRE(graphs_equal(g, back));
  }
}

TEST_CASE("zero-entry relation round-trips via an empty edge file") {
  HeteroGraph g = testgen::toy_graph();
  g.relations[1].adj = Csr(4, 2);
  auto dir = temp_dir("emptyroundtrip");
  save_graph(g, dir);
  REQUIRE(fs::exists(dir / "PS.edges"));
  REQUIRE(fs::file_size(dir / "PS.edges") == 0);
  REQUIRE(graphs_equal(g, load_graph(dir)));
}

TEST_CASE("metadata survives the round trip") {
  HeteroGraph g = testgen::toy_graph();
  g.metadata["provenance"] = {{"kept", {{"P", {0, 2}}}}};
  g.metadata["note"] = "condensed";
  auto dir = temp_dir("meta");
  save_graph(g, dir);
  HeteroGraph back = load_graph(dir);
  REQUIRE(back.metadata == g.metadata);
}
