#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "hetcond/metapath.hpp"
#include "hetcond/parallel.hpp"

namespace hetcond {

enum class PprMode { exact, push };

inline const char* ppr_mode_name(PprMode m) { return m == PprMode::exact ? "exact" : "push"; }

struct ppr_convergence_error : std::runtime_error {
  double residual;
  ppr_convergence_error(const std::string& what, double res)
      : std::runtime_error(what), residual(res) {}
};

/// PPR mass from target-type rows to source-type columns along one
/// meta-path: the target/source block of alpha*(I-(1-alpha)*S)^{-1} on the
/// bipartite lift S = [[0,B],[B^T,0]] of the normalized path matrix B.
struct InfluenceMatrix {
  Csr matrix;  // n_target rows x n_source cols
  double alpha = 0.15;
  double epsilon = 1e-4;
  PprMode mode = PprMode::push;
};

namespace ppr_detail {

/// Symmetric operator y = S x for the bipartite lift of block B without
/// materializing the lift: x = [x_t; x_s], y_t = B x_s, y_s = B^T x_t.
struct BipartiteLift {
  const Csr* block;  // normalized, n_t x n_s
  Csr block_t;       // transpose, built once

  explicit BipartiteLift(const Csr& b) : block(&b), block_t(b.transposed()) {}

  index_t n_t() const { return block->n_rows; }
  index_t n_s() const { return block->n_cols; }
  index_t size() const { return n_t() + n_s(); }

  void apply(std::span<const double> x, std::span<double> y) const {
    const Csr& b = *block;
    for (index_t i = 0; i < b.n_rows; ++i) {
      double acc = 0.0;
      for (index_t p = b.row_ptr[i]; p < b.row_ptr[i + 1]; ++p)
        acc += b.vals[p] * x[b.n_rows + b.col_idx[p]];
      y[i] = acc;
    }
    for (index_t i = 0; i < block_t.n_rows; ++i) {
      double acc = 0.0;
      for (index_t p = block_t.row_ptr[i]; p < block_t.row_ptr[i + 1]; ++p)
        acc += block_t.vals[p] * x[block_t.col_idx[p]];
      y[b.n_rows + i] = acc;
    }
  }
};

/// Generic symmetric operator from a square CSR.
struct SquareOp {
  const Csr* m;
  index_t size() const { return m->n_rows; }
  void apply(std::span<const double> x, std::span<double> y) const {
    for (index_t i = 0; i < m->n_rows; ++i) {
      double acc = 0.0;
      for (index_t p = m->row_ptr[i]; p < m->row_ptr[i + 1]; ++p)
        acc += m->value_at(p) * x[m->col_idx[p]];
      y[i] = acc;
    }
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Conjugate gradient on (I - (1-alpha) S) x = e_seed; returns alpha * x.
/// The system is SPD with eigenvalues in [alpha, 2-alpha].
template <typename Op>
std::vector<double> solve_exact(const Op& op, index_t seed, double alpha,
                                double tol = 1e-13, int max_iter = 20000) {
  index_t n = op.size();
  std::vector<double> x(n, 0.0), r(n, 0.0), p(n, 0.0), sp(n, 0.0), ap(n, 0.0);
  r[seed] = 1.0;
  p = r;
  double rs = 1.0;
  double res = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    if (res <= tol) break;
    op.apply(p, sp);
    for (index_t i = 0; i < n; ++i) ap[i] = p[i] - (1.0 - alpha) * sp[i];
    double denom = dot(p, ap);
    if (denom == 0.0) break;
    double step = rs / denom;
    for (index_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * ap[i];
    }
    double rs_new = dot(r, r);
    double beta = rs_new / rs;
    for (index_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rs = rs_new;
    res = std::sqrt(rs);
  }
  if (res > tol * 10)
    throw ppr_convergence_error("ppr exact solve did not converge, residual " +
                                    std::to_string(res),
                                res);
  for (auto& v : x) v *= alpha;
  return x;
}

/// Truncated residual propagation: p accumulates alpha * r each round and
/// the whole residual is pushed through S at once. Since ||S||_2 <= 1 for
/// a degree-normalized symmetric operator, stopping at ||r||_2 <= eps
/// bounds every entry's truncation error by eps.
template <typename Op>
std::vector<double> solve_push(const Op& op, index_t seed, double alpha, double eps,
                               int extra_rounds_cap = 128) {
  index_t n = op.size();
  std::vector<double> p(n, 0.0), r(n, 0.0), nr(n, 0.0);
  r[seed] = 1.0;
  int cap = static_cast<int>(std::ceil(std::log(eps) / std::log1p(-alpha))) + extra_rounds_cap;
  double rnorm = 1.0;
  for (int round = 0; round < cap; ++round) {
    for (index_t i = 0; i < n; ++i) p[i] += alpha * r[i];
    if (rnorm <= eps) return p;
    op.apply(r, nr);
    rnorm = 0.0;
    for (index_t i = 0; i < n; ++i) {
      r[i] = (1.0 - alpha) * nr[i];
      rnorm += r[i] * r[i];
    }
    rnorm = std::sqrt(rnorm);
  }
  if (rnorm > eps)
    throw ppr_convergence_error(
        "ppr push did not reach the residual threshold, residual " + std::to_string(rnorm),
        rnorm);
  return p;
}

}  // namespace ppr_detail

/// Single-seed PPR row on an arbitrary symmetric-normalized square matrix.
/// Push mode is entrywise within eps of the exact solution; entries below
/// eps/2 are dropped. Exact mode keeps the dense row.
inline std::vector<double> ppr_row(const Csr& sym, index_t seed, double alpha, double eps,
                                   PprMode mode) {
  if (sym.n_rows != sym.n_cols) throw std::invalid_argument("ppr_row: matrix not square");
  if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("ppr_row: alpha outside (0,1)");
  ppr_detail::SquareOp op{&sym};
  if (mode == PprMode::exact) return ppr_detail::solve_exact(op, seed, alpha);
  auto row = ppr_detail::solve_push(op, seed, alpha, eps / 2.0);
  for (auto& v : row)
    if (v < eps / 2.0) v = 0.0;
  return row;
}

/// Influence of source-type nodes on target-type rows along one composed
/// meta-path (sym-bipartite normalization required). Rows outside `rows`
/// are left empty when a subset is given.
inline InfluenceMatrix ppr_influence(const ComposedAdjacency& adj, double alpha, double eps,
                                     PprMode mode, std::span<const index_t> rows = {},
                                     int threads = 1) {
  if (adj.norm != Norm::sym_bipartite)
    throw std::invalid_argument("ppr_influence: adjacency must be sym-bipartite normalized");
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("ppr_influence: alpha outside (0,1)");
  if (eps <= 0.0) throw std::invalid_argument("ppr_influence: epsilon must be positive");

  ppr_detail::BipartiteLift lift(adj.matrix);
  index_t n_t = lift.n_t(), n_s = lift.n_s();

  std::vector<index_t> all_rows;
  if (rows.empty()) {
    all_rows.resize(n_t);
    for (index_t i = 0; i < n_t; ++i) all_rows[i] = i;
    rows = all_rows;
  }

  std::vector<std::vector<std::pair<index_t, double>>> sparse_rows(rows.size());
  parallel_for(static_cast<index_t>(rows.size()), threads, [&](index_t k) {
    index_t seed = rows[k];
    std::vector<double> sol = mode == PprMode::exact
                                  ? ppr_detail::solve_exact(lift, seed, alpha)
                                  : ppr_detail::solve_push(lift, seed, alpha, eps / 2.0);
    auto& out = sparse_rows[k];
    double drop = mode == PprMode::push ? eps / 2.0 : 0.0;
    for (index_t j = 0; j < n_s; ++j) {
      double v = sol[n_t + j];
      if (v > drop) out.emplace_back(j, v);
    }
  });

  InfluenceMatrix im;
  im.alpha = alpha;
  im.epsilon = eps;
  im.mode = mode;
  im.matrix = Csr(n_t, n_s);
  std::vector<index_t> row_of(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) row_of[k] = rows[k];
  // Assemble in row order; requested rows must be strictly increasing.
  for (std::size_t k = 1; k < row_of.size(); ++k)
    if (row_of[k] <= row_of[k - 1])
      throw std::invalid_argument("ppr_influence: row subset must be strictly increasing");
  std::size_t k = 0;
  for (index_t i = 0; i < n_t; ++i) {
    if (k < row_of.size() && row_of[k] == i) {
      for (auto& [j, v] : sparse_rows[k]) {
        im.matrix.col_idx.push_back(j);
        im.matrix.vals.push_back(v);
      }
      ++k;
    }
    im.matrix.row_ptr[i + 1] = im.matrix.nnz();
  }
  return im;
}

/// Entrywise sum of influence matrices with identical shapes.
inline InfluenceMatrix sum_influence(const std::vector<InfluenceMatrix>& mats) {
  if (mats.empty()) throw std::invalid_argument("sum_influence: empty input");
  InfluenceMatrix out = mats.front();
  if (mats.size() == 1) return out;
  index_t n_t = out.matrix.n_rows, n_s = out.matrix.n_cols;
  Csr sum(n_t, n_s);
  std::vector<double> acc(n_s, 0.0);
  std::vector<index_t> mark(n_s, -1), touched;
  for (index_t i = 0; i < n_t; ++i) {
    touched.clear();
    for (const auto& m : mats) {
      if (m.matrix.n_rows != n_t || m.matrix.n_cols != n_s)
        throw std::invalid_argument("sum_influence: shape mismatch");
      for (index_t p = m.matrix.row_ptr[i]; p < m.matrix.row_ptr[i + 1]; ++p) {
        index_t j = m.matrix.col_idx[p];
        if (mark[j] != i) {
          mark[j] = i;
          acc[j] = 0.0;
          touched.push_back(j);
        }
        acc[j] += m.matrix.vals[p];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (index_t j : touched) {
      sum.col_idx.push_back(j);
      sum.vals.push_back(acc[j]);
    }
    sum.row_ptr[i + 1] = sum.nnz();
  }
  out.matrix = std::move(sum);
  return out;
}

}  // namespace hetcond
