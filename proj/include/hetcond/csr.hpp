#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hetcond {

using index_t = std::int64_t;

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row. An empty value array means every stored entry is 1.
struct Csr {
  index_t n_rows = 0;
  index_t n_cols = 0;
  std::vector<index_t> row_ptr;  // size n_rows + 1
  std::vector<index_t> col_idx;  // size nnz
  std::vector<double> vals;      // empty, or size nnz

  Csr() : row_ptr(1, 0) {}
  Csr(index_t rows, index_t cols) : n_rows(rows), n_cols(cols), row_ptr(rows + 1, 0) {}

  index_t nnz() const { return static_cast<index_t>(col_idx.size()); }
  bool has_values() const { return !vals.empty(); }
  double value_at(index_t pos) const { return vals.empty() ? 1.0 : vals[pos]; }

  std::span<const index_t> row(index_t i) const {
    return {col_idx.data() + row_ptr[i], static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
  }
  index_t row_nnz(index_t i) const { return row_ptr[i + 1] - row_ptr[i]; }

  double density() const {
    if (n_rows == 0 || n_cols == 0) return 0.0;
    return static_cast<double>(nnz()) / (static_cast<double>(n_rows) * static_cast<double>(n_cols));
  }

  /// Build from an edge list; entries are sorted and duplicates collapsed
  /// (binary semantics, no values stored).
  static Csr from_coo(index_t n_rows, index_t n_cols,
                      std::vector<std::pair<index_t, index_t>> edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    Csr m(n_rows, n_cols);
    m.col_idx.reserve(edges.size());
    for (const auto& [r, c] : edges) {
      if (r < 0 || r >= n_rows || c < 0 || c >= n_cols)
        throw std::out_of_range("from_coo: entry (" + std::to_string(r) + "," +
                                std::to_string(c) + ") outside " + std::to_string(n_rows) +
                                "x" + std::to_string(n_cols));
      m.row_ptr[r + 1]++;
      m.col_idx.push_back(c);
    }
    for (index_t i = 0; i < n_rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
  }

  Csr transposed() const {
    Csr t(n_cols, n_rows);
    t.col_idx.resize(col_idx.size());
    if (has_values()) t.vals.resize(vals.size());
    for (index_t p = 0; p < nnz(); ++p) t.row_ptr[col_idx[p] + 1]++;
    for (index_t i = 0; i < n_cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
    std::vector<index_t> fill(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (index_t i = 0; i < n_rows; ++i) {
      for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
        index_t dst = fill[col_idx[p]]++;
        t.col_idx[dst] = i;
        if (has_values()) t.vals[dst] = vals[p];
      }
    }
    return t;  // source rows are sorted, so target columns come out sorted
  }

  std::vector<double> row_sums() const {
    std::vector<double> s(n_rows, 0.0);
    for (index_t i = 0; i < n_rows; ++i)
      for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s[i] += value_at(p);
    return s;
  }

  std::vector<double> col_sums() const {
    std::vector<double> s(n_cols, 0.0);
    for (index_t p = 0; p < nnz(); ++p) s[col_idx[p]] += value_at(p);
    return s;
  }

  /// Divide every nonzero row by its sum. Zero rows stay zero.
  Csr row_normalized() const {
    Csr m = *this;
    auto sums = row_sums();
    m.vals.resize(col_idx.size());
    for (index_t i = 0; i < n_rows; ++i)
      for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
        m.vals[p] = sums[i] > 0.0 ? value_at(p) / sums[i] : 0.0;
    return m;
  }

  /// D_r^{-1/2} A D_c^{-1/2} where D_r/D_c are row/column sum degrees.
  /// This equals the diagonal block normalization of the bipartite lift
  /// [[0, A], [A^T, 0]].
  Csr sym_bipartite_normalized() const {
    Csr m = *this;
    auto dr = row_sums();
    auto dc = col_sums();
    m.vals.resize(col_idx.size());
    for (index_t i = 0; i < n_rows; ++i) {
      for (index_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
        double d = dr[i] * dc[col_idx[p]];
        m.vals[p] = d > 0.0 ? value_at(p) / std::sqrt(d) : 0.0;
      }
    }
    return m;
  }

  /// Stored entries with values dropped (binary pattern).
  Csr pattern() const {
    Csr m = *this;
    m.vals.clear();
    return m;
  }

  bool same_pattern(const Csr& o) const {
    return n_rows == o.n_rows && n_cols == o.n_cols && row_ptr == o.row_ptr &&
           col_idx == o.col_idx;
  }

  /// Rows [r0, r1) as a standalone matrix with the same column count.
  Csr rows_slice(index_t r0, index_t r1) const {
    Csr m(r1 - r0, n_cols);
    index_t base = row_ptr[r0];
    m.col_idx.assign(col_idx.begin() + base, col_idx.begin() + row_ptr[r1]);
    if (has_values()) m.vals.assign(vals.begin() + base, vals.begin() + row_ptr[r1]);
    for (index_t i = r0; i < r1; ++i) m.row_ptr[i - r0 + 1] = row_ptr[i + 1] - base;
    return m;
  }

  void append_rows(const Csr& block) {
    if (block.n_cols != n_cols) throw std::invalid_argument("append_rows: column mismatch");
    if (block.has_values() != has_values() && nnz() > 0)
      throw std::invalid_argument("append_rows: value storage mismatch");
    index_t base = nnz();
    col_idx.insert(col_idx.end(), block.col_idx.begin(), block.col_idx.end());
    if (block.has_values()) vals.insert(vals.end(), block.vals.begin(), block.vals.end());
    for (index_t i = 1; i <= block.n_rows; ++i) row_ptr.push_back(base + block.row_ptr[i]);
    n_rows += block.n_rows;
  }

  /// Number of stored entries the product a*b would have.
  static index_t multiply_nnz(const Csr& a, const Csr& b) {
    if (a.n_cols != b.n_rows) throw std::invalid_argument("multiply: dimension mismatch");
    std::vector<index_t> mark(b.n_cols, -1);
    index_t total = 0;
    for (index_t i = 0; i < a.n_rows; ++i) {
      for (index_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
        index_t k = a.col_idx[p];
        for (index_t q = b.row_ptr[k]; q < b.row_ptr[k + 1]; ++q) {
          if (mark[b.col_idx[q]] != i) {
            mark[b.col_idx[q]] = i;
            ++total;
          }
        }
      }
    }
    return total;
  }

  /// Sparse product with numeric accumulation; output rows sorted.
  static Csr multiply(const Csr& a, const Csr& b) {
    if (a.n_cols != b.n_rows) throw std::invalid_argument("multiply: dimension mismatch");
    Csr c(a.n_rows, b.n_cols);
    std::vector<double> acc(b.n_cols, 0.0);
    std::vector<index_t> mark(b.n_cols, -1);
    std::vector<index_t> touched;
    for (index_t i = 0; i < a.n_rows; ++i) {
      touched.clear();
      for (index_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
        index_t k = a.col_idx[p];
        double av = a.value_at(p);
        for (index_t q = b.row_ptr[k]; q < b.row_ptr[k + 1]; ++q) {
          index_t j = b.col_idx[q];
          if (mark[j] != i) {
            mark[j] = i;
            acc[j] = 0.0;
            touched.push_back(j);
          }
          acc[j] += av * b.value_at(q);
        }
      }
      std::sort(touched.begin(), touched.end());
      for (index_t j : touched) {
        c.col_idx.push_back(j);
        c.vals.push_back(acc[j]);
      }
      c.row_ptr[i + 1] = c.nnz();
    }
    return c;
  }
};

}  // namespace hetcond
