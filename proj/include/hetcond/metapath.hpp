#pragma once

#include <string>
#include <vector>

#include "hetcond/hetero_graph.hpp"

namespace hetcond {

/// One hop of a meta-path: a relation traversed forward (rows = src_type)
/// or transposed (rows = dst_type).
struct MetaPathStep {
  std::string relation;
  bool transposed = false;

  std::string name() const { return transposed ? "~" + relation : relation; }
};

/// Ordered relation steps from the ending (target-side) type outward.
/// types[0] is the ending type, types[k] the source type; step i maps
/// types[i] rows to types[i+1] columns.
struct MetaPath {
  std::vector<MetaPathStep> steps;
  std::vector<std::string> types;

  int hops() const { return static_cast<int>(steps.size()); }
  const std::string& dst_type() const { return types.front(); }  // ending type
  const std::string& src_type() const { return types.back(); }

  /// Type trail, e.g. "P<-A<-P".
  std::string name() const {
    std::string s = types[0];
    for (std::size_t i = 1; i < types.size(); ++i) s += "<-" + types[i];
    return s;
  }

  /// Step trail, e.g. "PA,~PA".
  std::string step_names() const {
    std::string s;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (i) s += ",";
      s += steps[i].name();
    }
    return s;
  }
};

enum class Norm { none, row, sym_bipartite };

inline const char* norm_name(Norm n) {
  switch (n) {
    case Norm::none: return "none";
    case Norm::row: return "row";
    case Norm::sym_bipartite: return "sym-bipartite";
  }
  return "?";
}

/// Composed adjacency of a meta-path: rows are ending-type (target side)
/// nodes, columns are source-type nodes.
struct ComposedAdjacency {
  MetaPath path;
  Csr matrix;
  Norm norm = Norm::none;
};

/// Every type-checked relation sequence of length 1..max_hops ending at
/// end_type, each relation traversable forward or transposed. Ordered by
/// (length, lexicographic step names).
inline std::vector<MetaPath> enumerate_metapaths(const HeteroGraph& g,
                                                 const std::string& end_type, int max_hops) {
  if (max_hops < 1) throw std::invalid_argument("enumerate_metapaths: hop bound must be >= 1");
  if (!g.has_type(end_type))
    throw std::out_of_range("enumerate_metapaths: unknown type " + end_type);

  // Schema arcs grouped by the type the step leaves from (row side).
  struct Arc {
    MetaPathStep step;
    std::string next_type;
  };
  std::map<std::string, std::vector<Arc>> arcs;
  for (const auto& r : g.relations) {
    arcs[r.src_type].push_back({{r.name, false}, r.dst_type});
    arcs[r.dst_type].push_back({{r.name, true}, r.src_type});
  }

  std::vector<MetaPath> all;
  MetaPath cur;
  cur.types.push_back(end_type);
  auto extend = [&](auto&& self, int depth) -> void {
    if (depth == max_hops) return;
    auto it = arcs.find(cur.types.back());
    if (it == arcs.end()) return;
    for (const Arc& a : it->second) {
      cur.steps.push_back(a.step);
      cur.types.push_back(a.next_type);
      all.push_back(cur);
      self(self, depth + 1);
      cur.steps.pop_back();
      cur.types.pop_back();
    }
  };
  extend(extend, 0);

  std::stable_sort(all.begin(), all.end(), [](const MetaPath& a, const MetaPath& b) {
    if (a.hops() != b.hops()) return a.hops() < b.hops();
    for (int i = 0; i < a.hops(); ++i) {
      std::string an = a.steps[i].name(), bn = b.steps[i].name();
      if (an != bn) return an < bn;
    }
    return false;
  });
  return all;
}

namespace metapath_detail {

/// Intermediate products above this entry count are evaluated in row
/// blocks to bound memory.
inline constexpr index_t kDefaultIntermediateNnzLimit = index_t(1) << 26;

inline Csr step_matrix(const HeteroGraph& g, const MetaPathStep& step, bool row_norm) {
  const Relation* r = g.find_relation(step.relation);
  if (!r) throw std::out_of_range("compose: unknown relation " + step.relation);
  Csr m = step.transposed ? r->adj.transposed() : r->adj;
  return row_norm ? m.row_normalized() : m;
}

inline Csr multiply_chain_blocked(const Csr& head, const std::vector<Csr>& rest,
                                  std::size_t from, index_t block_rows) {
  Csr out(0, rest.back().n_cols);
  out.vals.clear();
  for (index_t r0 = 0; r0 < head.n_rows; r0 += block_rows) {
    index_t r1 = std::min(head.n_rows, r0 + block_rows);
    Csr block = head.rows_slice(r0, r1);
    for (std::size_t i = from; i < rest.size(); ++i) block = Csr::multiply(block, rest[i]);
    out.append_rows(block);
  }
  return out;
}

}  // namespace metapath_detail

/// Chained sparse product of the per-step adjacencies. With norm=row each
/// step is row-normalized before multiplication; with norm=none binary
/// steps yield path-count values; norm=sym_bipartite degree-normalizes the
/// final path-count matrix as the target/source block of its bipartite
/// lift. A zero row in any step propagates zeros downstream.
inline ComposedAdjacency compose(
    const HeteroGraph& g, const MetaPath& path, Norm norm,
    index_t max_intermediate_nnz = metapath_detail::kDefaultIntermediateNnzLimit) {
  if (path.hops() < 1) throw std::invalid_argument("compose: empty path");
  // Type-check against the graph before any multiplication.
  for (int i = 0; i < path.hops(); ++i) {
    const Relation* r = g.find_relation(path.steps[i].relation);
    if (!r) throw std::out_of_range("compose: unknown relation " + path.steps[i].relation);
    const std::string& in = path.steps[i].transposed ? r->dst_type : r->src_type;
    const std::string& out = path.steps[i].transposed ? r->src_type : r->dst_type;
    if (in != path.types[i] || out != path.types[i + 1])
      throw std::invalid_argument("compose: step " + path.steps[i].name() +
                                  " does not type-check at position " + std::to_string(i));
  }

  bool row_norm = norm == Norm::row;
  std::vector<Csr> steps;
  steps.reserve(path.hops());
  for (const auto& s : path.steps) steps.push_back(metapath_detail::step_matrix(g, s, row_norm));

  Csr acc = steps[0];
  for (std::size_t i = 1; i < steps.size(); ++i) {
    index_t predicted = Csr::multiply_nnz(acc, steps[i]);
    if (predicted > max_intermediate_nnz && i + 1 < steps.size()) {
      index_t block = std::max<index_t>(1, max_intermediate_nnz / std::max<index_t>(1, predicted / std::max<index_t>(1, acc.n_rows)));
      acc = metapath_detail::multiply_chain_blocked(acc, steps, i, block);
      break;
    }
    acc = Csr::multiply(acc, steps[i]);
  }

  if (norm == Norm::sym_bipartite) acc = acc.sym_bipartite_normalized();
  return {path, std::move(acc), norm};
}

/// Column ids with nonzero entries in the node's row (values ignored).
inline std::vector<index_t> reachable_set(const ComposedAdjacency& adj, index_t node) {
  if (node < 0 || node >= adj.matrix.n_rows)
    throw std::out_of_range("reachable_set: node " + std::to_string(node) + " out of range");
  std::vector<index_t> out;
  out.reserve(adj.matrix.row_nnz(node));
  for (index_t p = adj.matrix.row_ptr[node]; p < adj.matrix.row_ptr[node + 1]; ++p)
    if (adj.matrix.value_at(p) != 0.0) out.push_back(adj.matrix.col_idx[p]);
  return out;
}

}  // namespace hetcond
