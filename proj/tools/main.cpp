#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hetcond/pipeline.hpp"

namespace {

using namespace hetcond;

void add_common_flags(CLI::App* cmd, CondenseConfig& cfg, std::string& pool,
                      std::string& ppr_mode) {
  cmd->add_option("-i,--input", cfg.input, "graph directory")->required();
  cmd->add_option("--hops", cfg.hops, "meta-path hop bound K")->capture_default_str();
  cmd->add_option("--ratio", cfg.ratio, "condensation ratio r in (0,1]")->capture_default_str();
  cmd->add_option("--alpha", cfg.alpha, "PPR teleport probability")->capture_default_str();
  cmd->add_option("--epsilon", cfg.epsilon, "PPR approximation bound")->capture_default_str();
  cmd->add_option("--pool", pool, "selection pool: train or all")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "random seed (baseline only)")->capture_default_str();
  cmd->add_option("--roles", cfg.roles_file, "manual role override file");
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = auto)")->capture_default_str();
  cmd->add_option("--ppr-mode", ppr_mode, "PPR solver: push or exact")->capture_default_str();
}

void finish_config(CondenseConfig& cfg, const std::string& pool, const std::string& ppr_mode) {
  if (pool == "train")
    cfg.pool = PoolMode::train;
  else if (pool == "all")
    cfg.pool = PoolMode::all;
  else
    throw CLI::ValidationError("--pool", "expected 'train' or 'all'");
  if (ppr_mode == "push")
    cfg.ppr_mode = PprMode::push;
  else if (ppr_mode == "exact")
    cfg.ppr_mode = PprMode::exact;
  else
    throw CLI::ValidationError("--ppr-mode", "expected 'push' or 'exact'");
}

int cmd_inspect(const std::string& what, const CondenseConfig& cfg) {
  HeteroGraph g = load_graph(cfg.input);
  if (what == "metapaths") {
    auto paths = enumerate_metapaths(g, g.target_type, cfg.hops);
    std::cout << paths.size() << " meta-paths ending at " << g.target_type << " within "
              << cfg.hops << " hops\n";
    for (const auto& p : paths) {
      auto ca = compose(g, p, Norm::none);
      std::printf("  %-24s [%s] nnz=%lld density=%.6g\n", p.name().c_str(),
                  p.step_names().c_str(), static_cast<long long>(ca.matrix.nnz()),
                  ca.matrix.density());
    }
    return 0;
  }
  if (what == "hierarchy") {
    auto h = classify_hierarchy(g);
    if (!cfg.roles_file.empty()) apply_role_overrides(h, load_role_overrides(cfg.roles_file), g);
    for (const auto& [type, role] : h.role)
      std::cout << type << ": " << role_name(role) << " (distance " << h.distance.at(type)
                << ")\n";
    return 0;
  }
  if (what == "scores") {
    auto paths = enumerate_metapaths(g, g.target_type, cfg.hops);
    std::vector<ComposedAdjacency> composed;
    for (const auto& p : paths) composed.push_back(compose(g, p, Norm::none));
    auto pool = pipeline_detail::selection_pool(g, cfg.pool);
    index_t total = std::min<index_t>(
        static_cast<index_t>(pool.size()),
        static_cast<index_t>(std::ceil(cfg.ratio * g.type_count(g.target_type))));
    auto budget = class_budgets(g.labels, pool, cfg.ratio, total);
    UnifiedSelectOptions opts;
    opts.threads = cfg.threads > 0 ? cfg.threads : default_threads();
    auto sel = unified_select(g, composed, budget, pool, opts);
    for (const auto& ps : sel.table.paths) {
      std::cout << "path " << ps.path_name << " [" << ps.step_names << "] universe "
                << ps.universe << (ps.singleton_group ? " (singleton group)" : "") << "\n";
      for (const auto& e : ps.entries)
        std::printf("  node %lld class %lld cov %.0f div %.4f F+ %.6f F %.6f\n",
                    static_cast<long long>(e.node), static_cast<long long>(e.cls),
                    e.coverage_gain, e.diversity, e.f_gain, e.f_after);
    }
    std::cout << "selected:";
    for (index_t v : sel.selected) std::cout << " " << v;
    std::cout << "\n";
    return 0;
  }
  std::cerr << "unknown inspect target '" << what << "' (metapaths|hierarchy|scores)\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hetcond: training-free condensation for typed graphs"};
  app.require_subcommand(1);

  CondenseConfig cfg;
  std::string pool = "train", ppr_mode = "push", baseline, inspect_what;

  CLI::App* condense = app.add_subcommand("condense", "condense a graph to ratio r");
  add_common_flags(condense, cfg, pool, ppr_mode);
  condense->add_option("-o,--output", cfg.output, "output graph directory")->required();
  condense->add_option("--report", cfg.report_file, "report path (default <output>/report.json)");
  condense->add_option("--baseline", baseline, "use a baseline method: random");

  CLI::App* inspect = app.add_subcommand("inspect", "print a pipeline intermediate");
  inspect->add_option("what", inspect_what, "metapaths|hierarchy|scores")->required();
  add_common_flags(inspect, cfg, pool, ppr_mode);

  CLI11_PARSE(app, argc, argv);

  try {
    finish_config(cfg, pool, ppr_mode);
    if (app.got_subcommand(condense)) {
      if (!baseline.empty()) {
        if (baseline != "random") {
          std::cerr << "unknown baseline '" << baseline << "'\n";
          return 1;
        }
        cfg.random_baseline = true;
      }
      cfg.check();
      auto res = run_to_disk(cfg);
      std::cout << res.report.to_text();
      std::cout << "condensed graph written to " << cfg.output.string() << "\n";
      return 0;
    }
    if (app.got_subcommand(inspect)) {
      cfg.check();
      return cmd_inspect(inspect_what, cfg);
    }
  } catch (const hetcond::stage_error& e) {
    std::cerr << "error " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
