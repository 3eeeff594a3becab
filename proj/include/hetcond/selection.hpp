#pragma once

#include <cmath>
#include <map>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "hetcond/metapath.hpp"
#include "hetcond/parallel.hpp"

namespace hetcond {

struct SelectionBudget {
  double ratio = 0.0;
  std::map<index_t, index_t> per_class;
  index_t total = 0;
};

namespace selection_detail {

struct ClassCount {
  index_t cls;
  index_t count;
};

inline std::vector<ClassCount> pool_class_counts(std::span<const index_t> label_of,
                                                 std::span<const index_t> pool) {
  std::map<index_t, index_t> counts;
  for (index_t v : pool) {
    index_t l = v < static_cast<index_t>(label_of.size()) ? label_of[v] : -1;
    if (l >= 0) counts[l]++;
  }
  std::vector<ClassCount> out;
  for (auto& [c, n] : counts) out.push_back({c, n});
  return out;
}

}  // namespace selection_detail

/// Largest-remainder apportionment of `total` slots over the pool's class
/// populations, with a minimum of one slot for any present class (taken
/// from the largest allocation) and never more slots than a class has
/// members. Default total is ceil(r * labeled pool size).
inline SelectionBudget class_budgets(std::span<const index_t> label_of,
                                     std::span<const index_t> pool, double r,
                                     index_t total_override = -1) {
  if (r <= 0.0 || r > 1.0) throw std::invalid_argument("class_budgets: ratio outside (0,1]");
  if (pool.empty()) throw std::invalid_argument("class_budgets: empty pool");

  auto counts = selection_detail::pool_class_counts(label_of, pool);
  index_t pool_size = 0;
  for (auto& cc : counts) pool_size += cc.count;
  if (pool_size == 0) throw std::invalid_argument("class_budgets: pool has no labeled nodes");

  index_t total = total_override >= 0
                      ? std::min<index_t>(total_override, pool_size)
                      : static_cast<index_t>(std::ceil(r * static_cast<double>(pool_size)));

  SelectionBudget b;
  b.ratio = r;
  b.total = total;

  struct Slot {
    index_t cls, count, alloc;
    double quota;
  };
  std::vector<Slot> slots;
  index_t assigned = 0;
  for (auto& cc : counts) {
    double quota = static_cast<double>(total) * cc.count / static_cast<double>(pool_size);
    index_t floor_q = std::min<index_t>(cc.count, static_cast<index_t>(std::floor(quota)));
    slots.push_back({cc.cls, cc.count, floor_q, quota});
    assigned += floor_q;
  }

  // Leftover slots by largest remainder; ties favour the larger class,
  // then the lower class id.
  std::vector<std::size_t> order(slots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double ra = slots[a].quota - std::floor(slots[a].quota);
    double rb = slots[b].quota - std::floor(slots[b].quota);
    if (ra != rb) return ra > rb;
    if (slots[a].count != slots[b].count) return slots[a].count > slots[b].count;
    return slots[a].cls < slots[b].cls;
  });
  index_t leftover = total - assigned;
  for (std::size_t k = 0; leftover > 0; k = (k + 1) % order.size()) {
    Slot& s = slots[order[k]];
    if (s.alloc < s.count) {
      s.alloc++;
      leftover--;
    } else {
      bool any_room = false;
      for (auto& t : slots) any_room |= t.alloc < t.count;
      if (!any_room) break;
    }
  }

  // Minimum-one rebalancing: every present class gets a slot as long as
  // some other class can spare one.
  std::vector<std::size_t> zero_order(order);
  std::sort(zero_order.begin(), zero_order.end(), [&](std::size_t a, std::size_t b) {
    if (slots[a].count != slots[b].count) return slots[a].count > slots[b].count;
    return slots[a].cls < slots[b].cls;
  });
  for (std::size_t k : zero_order) {
    if (slots[k].alloc > 0 || slots[k].count == 0) continue;
    std::size_t donor = slots.size();
    for (std::size_t j = 0; j < slots.size(); ++j) {
      if (slots[j].alloc < 2) continue;
      if (donor == slots.size() || slots[j].alloc > slots[donor].alloc ||
          (slots[j].alloc == slots[donor].alloc && slots[j].cls < slots[donor].cls))
        donor = j;
    }
    if (donor == slots.size()) break;
    slots[donor].alloc--;
    slots[k].alloc = 1;
  }

  for (auto& s : slots) b.per_class[s.cls] = s.alloc;
  return b;
}

struct GreedyOptions {
  bool lazy = true;
  double coverage_scale = 1.0;                 // marginal gain multiplier (1/|R_hat|)
  std::span<const double> node_bonus = {};     // modular per-node term, indexed by node id
  std::span<const index_t> tie_degree = {};    // tie-break degree, indexed by node id
};

struct GreedyResult {
  std::vector<index_t> selected;       // in selection order
  std::vector<index_t> covered_sizes;  // cumulative |RF(S)| after each pick
  std::vector<double> gains;           // marginal objective value of each pick
};

/// Greedy maximization of |RF(S)| * coverage_scale + sum of node bonuses
/// over `pool`, RF taken from the rows of `adj`. Lazy evaluation gives the
/// same selection as the naive scan up to the shared tie rule
/// (gain, degree, -id).
inline GreedyResult greedy_select(const ComposedAdjacency& adj, std::span<const index_t> pool,
                                  index_t budget, const GreedyOptions& opts = {}) {
  if (budget > static_cast<index_t>(pool.size()))
    throw std::invalid_argument("greedy_select: budget exceeds pool size");
  if (budget > 0 && pool.empty())
    throw std::invalid_argument("greedy_select: positive budget with empty pool");

  const Csr& m = adj.matrix;
  auto degree_of = [&](index_t v) -> index_t {
    return opts.tie_degree.empty() ? m.row_nnz(v) : opts.tie_degree[v];
  };
  auto bonus_of = [&](index_t v) -> double {
    return opts.node_bonus.empty() ? 0.0 : opts.node_bonus[v];
  };

  std::vector<char> covered(m.n_cols, 0);
  index_t covered_count = 0;
  auto coverage_gain = [&](index_t v) -> index_t {
    index_t gain = 0;
    for (index_t c : m.row(v)) gain += !covered[c];
    return gain;
  };
  auto take = [&](index_t v) {
    for (index_t c : m.row(v)) {
      if (!covered[c]) {
        covered[c] = 1;
        ++covered_count;
      }
    }
  };

  GreedyResult res;
  res.selected.reserve(budget);

  if (!opts.lazy) {
    std::vector<char> used(pool.size(), 0);
    for (index_t step = 0; step < budget; ++step) {
      std::size_t best = pool.size();
      index_t best_cov = 0;
      double best_gain = 0.0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (used[i]) continue;
        index_t cov = coverage_gain(pool[i]);
        double gain = static_cast<double>(cov) * opts.coverage_scale + bonus_of(pool[i]);
        bool better =
            best == pool.size() || gain > best_gain ||
            (gain == best_gain && (degree_of(pool[i]) > degree_of(pool[best]) ||
                                   (degree_of(pool[i]) == degree_of(pool[best]) &&
                                    pool[i] < pool[best])));
        if (better) {
          best = i;
          best_cov = cov;
          best_gain = gain;
        }
      }
      used[best] = 1;
      take(pool[best]);
      res.selected.push_back(pool[best]);
      res.covered_sizes.push_back(covered_count);
      res.gains.push_back(best_gain);
    }
    return res;
  }

  // Lazy greedy: stale marginals in a priority queue, revalidated on pop.
  struct Entry {
    double gain;
    index_t degree;
    index_t node;
    index_t round;  // selection size the gain was computed at
  };
  auto cmp = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    if (a.degree != b.degree) return a.degree < b.degree;
    return a.node > b.node;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> queue(cmp);
  for (index_t v : pool)
    queue.push({static_cast<double>(coverage_gain(v)) * opts.coverage_scale + bonus_of(v),
                degree_of(v), v, 0});

  while (static_cast<index_t>(res.selected.size()) < budget) {
    Entry top = queue.top();
    queue.pop();
    index_t round = static_cast<index_t>(res.selected.size());
    if (top.round != round) {
      top.gain = static_cast<double>(coverage_gain(top.node)) * opts.coverage_scale +
                 bonus_of(top.node);
      top.round = round;
      queue.push(top);
      continue;
    }
    take(top.node);
    res.selected.push_back(top.node);
    res.covered_sizes.push_back(covered_count);
    res.gains.push_back(top.gain);
  }
  return res;
}

/// Receptive-field coverage maximization (no diversity term).
inline GreedyResult greedy_coverage(const ComposedAdjacency& adj, std::span<const index_t> pool,
                                    index_t budget, bool lazy = true) {
  return greedy_select(adj, pool, budget, {.lazy = lazy});
}

namespace selection_detail {

inline double jaccard_sorted(std::span<const index_t> a, std::span<const index_t> b) {
  if (a.empty() && b.empty()) return 1.0;  // empty-union convention
  std::size_t i = 0, j = 0, inter = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace selection_detail

/// Per-path mean Jaccard similarity of one node's reachable sets across a
/// group of meta-paths sharing endpoints. A single-path group has no
/// similarity pressure and returns 0.
inline std::vector<double> metapath_jaccard(const std::vector<const ComposedAdjacency*>& group,
                                            index_t node) {
  if (group.empty()) return {};
  if (group.size() == 1) return {0.0};
  for (const auto* a : group)
    if (node < 0 || node >= a->matrix.n_rows)
      throw std::out_of_range("metapath_jaccard: node out of range");

  std::size_t L = group.size();
  std::vector<std::span<const index_t>> rows(L);
  for (std::size_t i = 0; i < L; ++i) rows[i] = group[i]->matrix.row(node);

  std::vector<double> jhat(L, 0.0);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = i + 1; j < L; ++j) {
      double v = selection_detail::jaccard_sorted(rows[i], rows[j]);
      jhat[i] += v;
      jhat[j] += v;
    }
  }
  for (auto& v : jhat) v /= static_cast<double>(L - 1);
  return jhat;
}

struct PathSelectionEntry {
  index_t node;
  index_t cls;
  double coverage_gain;  // raw covered-count increase of this pick
  double diversity;      // 1 - Jhat of the node under this path
  double f_gain;         // normalized coverage + diversity
  double f_after;        // running F within the class run
  index_t covered_after;
};

struct PathScore {
  std::string path_name;
  std::string step_names;
  index_t universe = 0;  // |R_hat| = source-type node count
  bool singleton_group = false;
  std::vector<PathSelectionEntry> entries;
};

struct ScoreTable {
  std::vector<PathScore> paths;
};

struct SelectionResult {
  std::vector<index_t> selected;  // ascending node ids
  std::map<index_t, index_t> per_class;
  std::map<index_t, double> total_score;  // node -> summed F marginals
  ScoreTable table;
};

struct UnifiedSelectOptions {
  bool lazy = true;
  int threads = 1;
};

/// Per meta-path and per class, greedily maximizes coverage/|R_hat| plus
/// the node's precomputed diversity term; node scores are summed across
/// meta-paths over the union of per-path selections and the per-class
/// budget is filled with the top scorers (ties: higher degree, lower id).
inline SelectionResult unified_select(const HeteroGraph& g,
                                      const std::vector<ComposedAdjacency>& paths,
                                      const SelectionBudget& budget,
                                      std::span<const index_t> pool,
                                      const UnifiedSelectOptions& opts = {}) {
  if (paths.empty()) throw std::invalid_argument("unified_select: no meta-paths");
  const std::string& target = paths.front().path.dst_type();
  auto degrees = g.type_degrees(target);

  // Class pools.
  std::map<index_t, std::vector<index_t>> class_pool;
  for (index_t v : pool) {
    index_t l = v < static_cast<index_t>(g.labels.size()) ? g.labels[v] : -1;
    if (l >= 0) class_pool[l].push_back(v);
  }
  for (const auto& [cls, b] : budget.per_class) {
    if (b > 0 && !class_pool.count(cls))
      throw std::invalid_argument("unified_select: class " + std::to_string(cls) +
                                  " budgeted but absent from pool");
    if (b > static_cast<index_t>(class_pool.count(cls) ? class_pool[cls].size() : 0))
      throw std::invalid_argument("unified_select: class " + std::to_string(cls) +
                                  " budget exceeds pool population");
  }

  // Group paths by (src,dst) endpoints for the diversity term.
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < paths.size(); ++i)
    groups[{paths[i].path.src_type(), paths[i].path.dst_type()}].push_back(i);

  // diversity[i][v] = 1 - Jhat(path i) evaluated at node v.
  std::vector<std::vector<double>> diversity(paths.size());
  std::vector<bool> singleton(paths.size(), false);
  index_t n_target = paths.front().matrix.n_rows;
  for (auto& [key, idxs] : groups) {
    if (idxs.size() == 1) {
      singleton[idxs[0]] = true;
      diversity[idxs[0]].assign(n_target, 1.0);  // Jhat := 0
      continue;
    }
    std::vector<const ComposedAdjacency*> group;
    for (auto i : idxs) group.push_back(&paths[i]);
    for (auto i : idxs) diversity[i].assign(n_target, 0.0);
    parallel_for(n_target, opts.threads, [&](index_t v) {
      auto jhat = metapath_jaccard(group, v);
      for (std::size_t k = 0; k < idxs.size(); ++k) diversity[idxs[k]][v] = 1.0 - jhat[k];
    });
  }

  // One greedy run per (path, class) with a positive budget.
  struct Task {
    std::size_t path;
    index_t cls;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < paths.size(); ++i)
    for (const auto& [cls, b] : budget.per_class)
      if (b > 0) tasks.push_back({i, cls});
  std::vector<GreedyResult> runs(tasks.size());
  parallel_for(static_cast<index_t>(tasks.size()), opts.threads, [&](index_t t) {
    const Task& task = tasks[t];
    const auto& adj = paths[task.path];
    GreedyOptions go;
    go.lazy = opts.lazy;
    go.coverage_scale = 1.0 / std::max<index_t>(1, adj.matrix.n_cols);
    go.node_bonus = diversity[task.path];
    go.tie_degree = degrees;
    runs[t] = greedy_select(adj, class_pool.at(task.cls), budget.per_class.at(task.cls), go);
  });

  SelectionResult res;
  res.table.paths.resize(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    res.table.paths[i].path_name = paths[i].path.name();
    res.table.paths[i].step_names = paths[i].path.step_names();
    res.table.paths[i].universe = paths[i].matrix.n_cols;
    res.table.paths[i].singleton_group = singleton[i];
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const Task& task = tasks[t];
    const GreedyResult& run = runs[t];
    PathScore& ps = res.table.paths[task.path];
    double f_running = 0.0;
    index_t prev_cov = 0;
    for (std::size_t k = 0; k < run.selected.size(); ++k) {
      index_t v = run.selected[k];
      f_running += run.gains[k];
      ps.entries.push_back({v, task.cls, static_cast<double>(run.covered_sizes[k] - prev_cov),
                            diversity[task.path][v], run.gains[k], f_running,
                            run.covered_sizes[k]});
      prev_cov = run.covered_sizes[k];
      res.total_score[v] += run.gains[k];  // absent under a path => contributes 0
    }
  }

  // Top-k per class over the union of per-path selections.
  for (const auto& [cls, b] : budget.per_class) {
    if (b == 0) continue;
    std::vector<index_t> candidates;
    for (const auto& [v, s] : res.total_score)
      if (g.labels[v] == cls) candidates.push_back(v);
    std::sort(candidates.begin(), candidates.end(), [&](index_t a, index_t c) {
      double sa = res.total_score.at(a), sc = res.total_score.at(c);
      if (sa != sc) return sa > sc;
      if (degrees[a] != degrees[c]) return degrees[a] > degrees[c];
      return a < c;
    });
    candidates.resize(std::min<std::size_t>(candidates.size(), b));
    for (index_t v : candidates) res.selected.push_back(v);
    res.per_class[cls] = static_cast<index_t>(candidates.size());
  }
  std::sort(res.selected.begin(), res.selected.end());
  return res;
}

}  // namespace hetcond
