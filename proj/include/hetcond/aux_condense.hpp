#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hetcond/hierarchy.hpp"
#include "hetcond/ppr.hpp"
#include "hetcond/selection.hpp"

namespace hetcond {

enum class ImportanceMeasure { ppr, degree };

struct FatherSelection {
  std::vector<index_t> ranked;  // best first
  std::vector<double> scores;   // aligned with ranked
};

/// Rank father-type nodes by aggregated influence over the kept targets:
/// the per-path PPR matrices are summed and each father's score is its
/// column sum over the kept target rows. Ties: higher degree, lower id.
inline FatherSelection select_father(const HeteroGraph& g, const TypeHierarchy& hierarchy,
                                     const std::vector<ComposedAdjacency>& paths,
                                     std::span<const index_t> kept_targets, index_t budget,
                                     double alpha = 0.15, double eps = 1e-4,
                                     PprMode mode = PprMode::push, int threads = 1,
                                     ImportanceMeasure importance = ImportanceMeasure::ppr) {
  if (paths.empty()) throw std::invalid_argument("select_father: no meta-paths supplied");
  const std::string& father_type = paths.front().path.src_type();
  index_t n_father = g.type_count(father_type);
  if (budget > n_father)
    throw std::invalid_argument("select_father: budget exceeds population of " + father_type);
  if (hierarchy.role.at(father_type) != TypeRole::father)
    throw std::invalid_argument("select_father: " + father_type + " is not a father type");

  std::vector<double> score(n_father, 0.0);
  if (importance == ImportanceMeasure::ppr) {
    std::vector<InfluenceMatrix> mats;
    mats.reserve(paths.size());
    for (const auto& p : paths)
      mats.push_back(ppr_influence(p, alpha, eps, mode, kept_targets, threads));
    InfluenceMatrix total = sum_influence(mats);
    score = total.matrix.col_sums();
  } else {
    auto deg = g.type_degrees(father_type);
    for (index_t j = 0; j < n_father; ++j) score[j] = static_cast<double>(deg[j]);
  }

  auto degrees = g.type_degrees(father_type);
  std::vector<index_t> order(n_father);
  for (index_t j = 0; j < n_father; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    if (degrees[a] != degrees[b]) return degrees[a] > degrees[b];
    return a < b;
  });
  order.resize(budget);

  FatherSelection sel;
  sel.ranked = order;
  for (index_t j : order) sel.scores.push_back(score[j]);
  return sel;
}

/// Synthesized condensed leaf node: one father's leaf neighborhood with
/// mean features, connected to its anchor father and, through reverse
/// edges, to every other kept father adjacent to a member leaf.
struct HyperNode {
  std::string leaf_type;
  index_t id = -1;                 // new leaf-type id after synthesis
  std::vector<index_t> members;    // original leaf ids, sorted
  std::string anchor_type;
  index_t anchor_id = -1;
  std::vector<double> feature;     // member mean; empty if type has no features
  // Kept fathers adjacent to a member, anchor included; (type, id).
  std::vector<std::pair<std::string, index_t>> father_links;
  // Condensed-graph edges: (relation name, kept father original id).
  std::vector<std::pair<std::string, index_t>> relation_edges;

  index_t degree() const { return static_cast<index_t>(father_links.size()); }
};

struct MergeLogEntry {
  index_t absorbed_anchor;
  index_t into_anchor;
  index_t shared_fathers;
};

struct LeafSynthesis {
  std::vector<HyperNode> hyper;
  std::vector<MergeLogEntry> merges;
  bool no_anchor_warning = false;  // leaf type had no edge to any kept father
};

namespace aux_detail {

struct FatherLeafRelation {
  const Relation* rel;
  bool father_is_src;
  std::string father_type;
};

inline std::vector<FatherLeafRelation> father_leaf_relations(const HeteroGraph& g,
                                                             const TypeHierarchy& h,
                                                             const std::string& leaf_type) {
  std::vector<FatherLeafRelation> out;
  for (const auto& r : g.relations) {
    if (r.src_type == leaf_type && h.role.count(r.dst_type) &&
        h.role.at(r.dst_type) == TypeRole::father)
      out.push_back({&r, false, r.dst_type});
    else if (r.dst_type == leaf_type && h.role.count(r.src_type) &&
             h.role.at(r.src_type) == TypeRole::father)
      out.push_back({&r, true, r.src_type});
  }
  return out;
}

inline void refresh_links(HyperNode& h,
                          const std::map<std::string, std::vector<std::vector<index_t>>>&
                              leaf_to_fathers_by_rel,
                          const std::map<std::string, std::string>& rel_father_type) {
  std::set<std::pair<std::string, index_t>> edges;
  std::set<std::pair<std::string, index_t>> links;
  for (const auto& [rel, table] : leaf_to_fathers_by_rel) {
    for (index_t m : h.members)
      for (index_t f : table[m]) {
        edges.insert({rel, f});
        links.insert({rel_father_type.at(rel), f});
      }
  }
  h.relation_edges.assign(edges.begin(), edges.end());
  h.father_links.assign(links.begin(), links.end());
}

}  // namespace aux_detail

/// Build one hyper-node per kept father with leaf neighbors, then merge
/// the lowest-degree hyper-node into its most-overlapping peer until the
/// budget is met. Features are member means, recomputed after merging.
inline LeafSynthesis synthesize_leaf(const HeteroGraph& g, const TypeHierarchy& hierarchy,
                                     const std::string& leaf_type,
                                     const std::map<std::string, std::vector<index_t>>& kept_fathers,
                                     index_t budget) {
  if (budget < 1) throw std::invalid_argument("synthesize_leaf: budget must be >= 1");
  if (hierarchy.role.at(leaf_type) != TypeRole::leaf)
    throw std::invalid_argument("synthesize_leaf: " + leaf_type + " is not a leaf type");

  index_t n_leaf = g.type_count(leaf_type);
  auto rels = aux_detail::father_leaf_relations(g, hierarchy, leaf_type);

  // Per relation: leaf id -> kept father ids (ascending).
  std::map<std::string, std::vector<std::vector<index_t>>> leaf_to_fathers_by_rel;
  std::map<std::string, std::string> rel_father_type;
  // Per father type: kept father id -> leaf members.
  std::map<std::string, std::map<index_t, std::set<index_t>>> groups_by_type;

  for (const auto& fr : rels) {
    auto kit = kept_fathers.find(fr.father_type);
    if (kit == kept_fathers.end()) continue;
    std::set<index_t> kept_set(kit->second.begin(), kit->second.end());
    auto& table = leaf_to_fathers_by_rel[fr.rel->name];
    if (table.empty()) table.resize(n_leaf);
    rel_father_type[fr.rel->name] = fr.father_type;
    const Csr& adj = fr.rel->adj;
    if (fr.father_is_src) {
      for (index_t f = 0; f < adj.n_rows; ++f) {
        if (!kept_set.count(f)) continue;
        for (index_t leaf : adj.row(f)) {
          table[leaf].push_back(f);
          groups_by_type[fr.father_type][f].insert(leaf);
        }
      }
    } else {
      for (index_t leaf = 0; leaf < adj.n_rows; ++leaf) {
        for (index_t f : adj.row(leaf)) {
          if (!kept_set.count(f)) continue;
          table[leaf].push_back(f);
          groups_by_type[fr.father_type][f].insert(leaf);
        }
      }
    }
  }
  for (auto& [rel, table] : leaf_to_fathers_by_rel)
    for (auto& fathers : table) {
      std::sort(fathers.begin(), fathers.end());
      fathers.erase(std::unique(fathers.begin(), fathers.end()), fathers.end());
    }

  LeafSynthesis out;

  // Anchor order: father types root-outward, then ascending father id.
  for (const auto& father_type : hierarchy.fathers()) {
    auto git = groups_by_type.find(father_type);
    if (git == groups_by_type.end()) continue;
    for (const auto& [father_id, members] : git->second) {
      if (members.empty()) continue;
      HyperNode h;
      h.leaf_type = leaf_type;
      h.anchor_type = father_type;
      h.anchor_id = father_id;
      h.members.assign(members.begin(), members.end());
      aux_detail::refresh_links(h, leaf_to_fathers_by_rel, rel_father_type);
      out.hyper.push_back(std::move(h));
    }
  }

  if (out.hyper.empty()) {
    out.no_anchor_warning = true;
    return out;
  }

  // Merge until within budget: lowest degree first, into the peer sharing
  // the most fathers (ties: smaller combined membership, lower index).
  while (static_cast<index_t>(out.hyper.size()) > budget) {
    std::size_t victim = 0;
    for (std::size_t i = 1; i < out.hyper.size(); ++i) {
      const auto& a = out.hyper[i];
      const auto& b = out.hyper[victim];
      if (a.degree() != b.degree() ? a.degree() < b.degree()
                                   : a.members.size() < b.members.size())
        victim = i;
    }
    std::set<std::pair<std::string, index_t>> victim_links(out.hyper[victim].father_links.begin(),
                                                           out.hyper[victim].father_links.end());
    std::size_t partner = victim == 0 ? 1 : 0;
    index_t best_shared = -1;
    std::size_t best_combined = 0;
    for (std::size_t i = 0; i < out.hyper.size(); ++i) {
      if (i == victim) continue;
      index_t shared = 0;
      for (const auto& l : out.hyper[i].father_links) shared += victim_links.count(l);
      std::size_t combined = out.hyper[i].members.size() + out.hyper[victim].members.size();
      if (shared > best_shared || (shared == best_shared && combined < best_combined)) {
        best_shared = shared;
        best_combined = combined;
        partner = i;
      }
    }
    HyperNode& dst = out.hyper[partner];
    HyperNode& src = out.hyper[victim];
    out.merges.push_back({src.anchor_id, dst.anchor_id, best_shared});
    std::set<index_t> merged(dst.members.begin(), dst.members.end());
    merged.insert(src.members.begin(), src.members.end());
    dst.members.assign(merged.begin(), merged.end());
    aux_detail::refresh_links(dst, leaf_to_fathers_by_rel, rel_father_type);
    out.hyper.erase(out.hyper.begin() + victim);
  }

  // Final ids and features.
  auto fit = g.features.find(leaf_type);
  for (std::size_t i = 0; i < out.hyper.size(); ++i) {
    HyperNode& h = out.hyper[i];
    h.id = static_cast<index_t>(i);
    if (fit != g.features.end()) {
      const FeatureMatrix& fm = fit->second;
      h.feature.assign(fm.n_cols, 0.0);
      for (index_t m : h.members) {
        auto row = fm.row(m);
        for (index_t c = 0; c < fm.n_cols; ++c) h.feature[c] += row[c];
      }
      for (auto& v : h.feature) v /= static_cast<double>(h.members.size());
    }
  }
  return out;
}

struct TypeCondensation {
  std::string type;
  TypeRole role = TypeRole::father;
  index_t original = 0;
  index_t budget = 0;
  index_t condensed = 0;
  bool full_budget = false;
  bool no_anchor_warning = false;
  std::vector<std::pair<index_t, double>> top_scores;  // best-ranked fathers
  std::vector<MergeLogEntry> merges;
};

struct CondensationPlan {
  std::map<std::string, std::vector<index_t>> kept;  // ascending original ids
  std::vector<HyperNode> hyper;
  std::vector<TypeCondensation> types;
};

struct AuxCondenseOptions {
  double alpha = 0.15;
  double epsilon = 1e-4;
  PprMode ppr_mode = PprMode::push;
  ImportanceMeasure importance = ImportanceMeasure::ppr;
  int hops = 2;
  int threads = 1;
  index_t max_intermediate_nnz = metapath_detail::kDefaultIntermediateNnzLimit;
};

/// Condense every non-target type: father types keep their top influence
/// nodes (root-outward order), leaf types are replaced by synthesized
/// hyper-nodes. Budgets are ceil(r * N_type); a full budget keeps the
/// type as-is.
inline CondensationPlan condense_other_types(const HeteroGraph& g, const TypeHierarchy& hierarchy,
                                             std::span<const index_t> kept_targets, double r,
                                             const AuxCondenseOptions& opts = {}) {
  if (kept_targets.empty())
    throw std::invalid_argument("condense_other_types: no kept target nodes");
  if (r <= 0.0 || r > 1.0)
    throw std::invalid_argument("condense_other_types: ratio outside (0,1]");

  CondensationPlan plan;
  plan.kept[g.target_type] = {kept_targets.begin(), kept_targets.end()};

  std::vector<MetaPath> all_paths = enumerate_metapaths(g, g.target_type, opts.hops);
  std::vector<index_t> sorted_targets(kept_targets.begin(), kept_targets.end());
  std::sort(sorted_targets.begin(), sorted_targets.end());

  for (const auto& father_type : hierarchy.fathers()) {
    index_t n = g.type_count(father_type);
    index_t budget = std::min<index_t>(
        n, static_cast<index_t>(std::ceil(r * static_cast<double>(n))));
    TypeCondensation tc;
    tc.type = father_type;
    tc.role = TypeRole::father;
    tc.original = n;
    tc.budget = budget;
    if (budget >= n) {
      std::vector<index_t> all(n);
      for (index_t i = 0; i < n; ++i) all[i] = i;
      plan.kept[father_type] = std::move(all);
      tc.condensed = n;
      tc.full_budget = true;
    } else {
      std::vector<ComposedAdjacency> paths;
      for (const auto& p : all_paths)
        if (p.src_type() == father_type)
          paths.push_back(compose(g, p, Norm::sym_bipartite, opts.max_intermediate_nnz));
      if (paths.empty())
        throw std::runtime_error("condense_other_types: no meta-path reaches father type '" +
                                 father_type + "' within " + std::to_string(opts.hops) +
                                 " hops; raise the hop bound");
      auto sel = select_father(g, hierarchy, paths, sorted_targets, budget, opts.alpha,
                               opts.epsilon, opts.ppr_mode, opts.threads, opts.importance);
      for (std::size_t i = 0; i < sel.ranked.size() && i < 10; ++i)
        tc.top_scores.emplace_back(sel.ranked[i], sel.scores[i]);
      std::vector<index_t> kept = sel.ranked;
      std::sort(kept.begin(), kept.end());
      plan.kept[father_type] = std::move(kept);
      tc.condensed = budget;
    }
    plan.types.push_back(std::move(tc));
  }

  for (const auto& leaf_type : hierarchy.leaves()) {
    index_t n = g.type_count(leaf_type);
    index_t budget = std::min<index_t>(
        n, static_cast<index_t>(std::ceil(r * static_cast<double>(n))));
    TypeCondensation tc;
    tc.type = leaf_type;
    tc.role = TypeRole::leaf;
    tc.original = n;
    tc.budget = budget;
    if (budget >= n) {
      std::vector<index_t> all(n);
      for (index_t i = 0; i < n; ++i) all[i] = i;
      plan.kept[leaf_type] = std::move(all);
      tc.condensed = n;
      tc.full_budget = true;
    } else {
      auto syn = synthesize_leaf(g, hierarchy, leaf_type, plan.kept, budget);
      tc.condensed = static_cast<index_t>(syn.hyper.size());
      tc.no_anchor_warning = syn.no_anchor_warning;
      tc.merges = syn.merges;
      if (syn.hyper.empty()) plan.kept[leaf_type] = {};  // type survives with zero nodes
      for (auto& h : syn.hyper) plan.hyper.push_back(std::move(h));
    }
    plan.types.push_back(std::move(tc));
  }
  return plan;
}

}  // namespace hetcond
