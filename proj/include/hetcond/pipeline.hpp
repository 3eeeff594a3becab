#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "hetcond/aux_condense.hpp"
#include "hetcond/graph_io.hpp"
#include "hetcond/hierarchy.hpp"
#include "hetcond/metapath.hpp"
#include "hetcond/parallel.hpp"
#include "hetcond/report.hpp"
#include "hetcond/selection.hpp"
#include "hetcond/subgraph.hpp"

namespace hetcond {

enum class PoolMode { train, all };

struct CondenseConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  double ratio = 0.1;
  int hops = 2;
  double alpha = 0.15;
  double epsilon = 1e-4;
  PoolMode pool = PoolMode::train;
  std::uint64_t seed = 0;
  std::filesystem::path roles_file;  // optional manual role overrides
  std::filesystem::path report_file; // optional; default <output>/report.json
  bool random_baseline = false;
  int threads = 0;  // 0 = hardware concurrency
  PprMode ppr_mode = PprMode::push;
  bool lazy_greedy = true;

  void check() const {
    if (ratio <= 0.0 || ratio > 1.0) throw std::invalid_argument("ratio must be in (0,1]");
    if (hops < 1) throw std::invalid_argument("hops must be >= 1");
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("alpha must be in (0,1)");
    if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["input"] = input.string();
    j["output"] = output.string();
    j["ratio"] = ratio;
    j["hops"] = hops;
    j["alpha"] = alpha;
    j["epsilon"] = epsilon;
    j["pool"] = pool == PoolMode::train ? "train" : "all";
    j["seed"] = seed;
    j["roles_file"] = roles_file.string();
    j["baseline"] = random_baseline ? "random" : "none";
    j["ppr_mode"] = ppr_mode_name(ppr_mode);
    return j;
  }
};

struct stage_error : std::runtime_error {
  std::string stage;
  stage_error(std::string stg, const std::string& what)
      : std::runtime_error("[" + stg + "] " + what), stage(std::move(stg)) {}
};

struct RunResult {
  HeteroGraph graph;       // condensed graph (in memory)
  RemapTable remap;
  CondensationReport report;
};

namespace pipeline_detail {

class StageClock {
 public:
  explicit StageClock(std::map<std::string, double>& sink) : sink_(sink) {}
  template <typename Fn>
  auto time(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, t0);
      } else {
        auto out = fn();
        record(stage, t0);
        return out;
      }
    } catch (const stage_error&) {
      throw;
    } catch (const std::exception& e) {
      throw stage_error(stage, e.what());
    }
  }

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    sink_[stage] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  std::map<std::string, double>& sink_;
};

inline std::vector<index_t> selection_pool(const HeteroGraph& g, PoolMode mode) {
  std::vector<index_t> pool;
  if (mode == PoolMode::train) {
    pool = g.train_ids;
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  } else {
    for (index_t v = 0; v < static_cast<index_t>(g.labels.size()); ++v)
      if (g.labels[v] >= 0) pool.push_back(v);
  }
  return pool;
}

inline std::map<index_t, index_t> class_histogram(const HeteroGraph& g,
                                                  std::span<const index_t> ids) {
  std::map<index_t, index_t> h;
  for (index_t v : ids)
    if (g.labels[v] >= 0) h[g.labels[v]]++;
  return h;
}

}  // namespace pipeline_detail

/// Full condensation: load -> enumerate meta-paths -> select target nodes
/// -> condense other types -> induce -> report. The returned graph is not
/// yet on disk; run_to_disk handles atomic output.
inline RunResult run(const CondenseConfig& cfg) {
  cfg.check();
  int threads = cfg.threads > 0 ? cfg.threads : default_threads();

  RunResult res;
  pipeline_detail::StageClock clock(res.report.timings_ms);

  HeteroGraph g = clock.time("load", [&] { return load_graph(cfg.input); });

  TypeHierarchy hierarchy = clock.time("hierarchy", [&] {
    auto h = classify_hierarchy(g);
    if (!cfg.roles_file.empty()) apply_role_overrides(h, load_role_overrides(cfg.roles_file), g);
    return h;
  });

  std::vector<MetaPath> all_paths =
      clock.time("metapaths", [&] { return enumerate_metapaths(g, g.target_type, cfg.hops); });

  // Target-type selection pool and budget: ceil(r * N_target) nodes drawn
  // from the pool, apportioned by the pool's class proportions.
  std::vector<index_t> pool = pipeline_detail::selection_pool(g, cfg.pool);
  if (pool.empty()) throw stage_error("select-target", "selection pool is empty");
  index_t n_target = g.type_count(g.target_type);
  index_t target_total =
      std::min<index_t>(static_cast<index_t>(pool.size()),
                        static_cast<index_t>(std::ceil(cfg.ratio * static_cast<double>(n_target))));
  SelectionBudget budget = class_budgets(g.labels, pool, cfg.ratio, target_total);

  std::vector<index_t> kept_targets;
  if (cfg.random_baseline) {
    clock.time("select-target", [&] {
      std::mt19937_64 rng(cfg.seed);
      std::map<index_t, std::vector<index_t>> class_pool;
      for (index_t v : pool)
        if (g.labels[v] >= 0) class_pool[g.labels[v]].push_back(v);
      for (auto& [cls, b] : budget.per_class) {
        auto& cp = class_pool[cls];
        std::shuffle(cp.begin(), cp.end(), rng);
        for (index_t i = 0; i < b; ++i) kept_targets.push_back(cp[i]);
      }
      std::sort(kept_targets.begin(), kept_targets.end());
    });
    res.report.method = "random";
  } else {
    // Composed adjacencies (path-count values) for coverage + diversity.
    std::vector<ComposedAdjacency> composed(all_paths.size());
    clock.time("compose", [&] {
      parallel_for(static_cast<index_t>(all_paths.size()), threads,
                   [&](index_t i) { composed[i] = compose(g, all_paths[i], Norm::none); });
    });
    for (const auto& ca : composed)
      res.report.metapaths.push_back(
          {ca.path.name(), ca.path.step_names(), ca.matrix.nnz(), ca.matrix.density()});

    SelectionResult sel = clock.time("select-target", [&] {
      UnifiedSelectOptions opts;
      opts.lazy = cfg.lazy_greedy;
      opts.threads = threads;
      return unified_select(g, composed, budget, pool, opts);
    });
    kept_targets = sel.selected;
    res.report.score_table = std::move(sel.table);
    res.report.method = "metapath";
  }

  CondensationPlan plan = clock.time("condense-others", [&] {
    if (cfg.random_baseline) {
      // Uniform per-type selection at the same budgets; no synthesis.
      CondensationPlan p;
      p.kept[g.target_type] = kept_targets;
      std::mt19937_64 rng(cfg.seed + 1);
      for (const auto& t : g.node_types) {
        if (t.name == g.target_type) continue;
        index_t b = std::min<index_t>(
            t.count, static_cast<index_t>(std::ceil(cfg.ratio * static_cast<double>(t.count))));
        std::vector<index_t> ids(t.count);
        for (index_t i = 0; i < t.count; ++i) ids[i] = i;
        std::shuffle(ids.begin(), ids.end(), rng);
        ids.resize(b);
        std::sort(ids.begin(), ids.end());
        TypeCondensation tc;
        tc.type = t.name;
        tc.role = hierarchy.role.at(t.name);
        tc.original = t.count;
        tc.budget = b;
        tc.condensed = b;
        p.types.push_back(tc);
        p.kept[t.name] = std::move(ids);
      }
      return p;
    }
    AuxCondenseOptions opts;
    opts.alpha = cfg.alpha;
    opts.epsilon = cfg.epsilon;
    opts.ppr_mode = cfg.ppr_mode;
    opts.hops = cfg.hops;
    opts.threads = threads;
    return condense_other_types(g, hierarchy, kept_targets, cfg.ratio, opts);
  });

  InducedGraph induced =
      clock.time("induce", [&] { return induce_subgraph(g, plan.kept, plan.hyper); });

  res.report.config = cfg.to_json();
  for (const auto& t : g.node_types) res.report.original_counts[t.name] = t.count;
  for (const auto& t : induced.graph.node_types) res.report.condensed_counts[t.name] = t.count;
  for (const auto& [type, role] : hierarchy.role) res.report.roles[type] = role_name(role);
  res.report.target_budget = budget;
  res.report.class_before = pipeline_detail::class_histogram(g, pool);
  res.report.class_after = pipeline_detail::class_histogram(
      induced.graph, [&] {
        std::vector<index_t> all(induced.graph.type_count(g.target_type));
        for (index_t i = 0; i < static_cast<index_t>(all.size()); ++i) all[i] = i;
        return all;
      }());
  res.report.other_types = plan.types;

  res.graph = std::move(induced.graph);
  res.remap = std::move(induced.remap);
  return res;
}

inline RunResult run_random_baseline(CondenseConfig cfg) {
  cfg.random_baseline = true;
  return run(cfg);
}

/// Execute the pipeline and write the condensed graph and report. The
/// graph directory appears atomically: written to a temp sibling and
/// renamed, so a failed run leaves no partial output.
inline RunResult run_to_disk(const CondenseConfig& cfg) {
  namespace fs = std::filesystem;
  RunResult res = run(cfg);

  auto rep = validate(res.graph);
  if (!rep.ok())
    throw stage_error("save", "condensed graph failed validation:\n" + rep.to_string());

  fs::path tmp = cfg.output;
  tmp += ".tmp";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  try {
    save_graph(res.graph, tmp);
    fs::remove_all(cfg.output, ec);
    fs::rename(tmp, cfg.output);
  } catch (const std::exception& e) {
    fs::remove_all(tmp, ec);
    throw stage_error("save", e.what());
  }

  fs::path report_json = cfg.report_file.empty() ? cfg.output / "report.json" : cfg.report_file;
  try {
    std::ofstream out(report_json);
    if (!out) throw std::runtime_error("cannot write " + report_json.string());
    out << res.report.to_json().dump(2) << "\n";
    fs::path report_txt = report_json;
    report_txt.replace_extension(".txt");
    std::ofstream txt(report_txt);
    if (!txt) throw std::runtime_error("cannot write " + report_txt.string());
    txt << res.report.to_text();
  } catch (const std::exception& e) {
    throw stage_error("report", e.what());
  }
  return res;
}

}  // namespace hetcond
