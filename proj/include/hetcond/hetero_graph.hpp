#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetcond/csr.hpp"

namespace hetcond {

struct NodeTypeInfo {
  std::string name;
  index_t count = 0;
};

/// Directed relation between two node types. One direction is stored;
/// the reverse is obtained by transposing the adjacency.
struct Relation {
  std::string name;
  std::string src_type;
  std::string dst_type;
  Csr adj;  // n_rows = N_src, n_cols = N_dst, binary
};

struct FeatureMatrix {
  index_t n_rows = 0;
  index_t n_cols = 0;
  std::vector<double> data;  // row-major, size n_rows * n_cols

  std::span<const double> row(index_t i) const {
    return {data.data() + i * n_cols, static_cast<std::size_t>(n_cols)};
  }
};

/// Typed graph: node sets per type, sparse adjacency per relation,
/// optional dense features per type, labels on the target type only.
/// Immutable after load by convention; operations build new graphs.
struct HeteroGraph {
  std::vector<NodeTypeInfo> node_types;
  std::vector<Relation> relations;
  std::map<std::string, FeatureMatrix> features;
  std::string target_type;
  std::vector<index_t> labels;  // size N_target, -1 = unlabeled
  std::vector<index_t> train_ids, valid_ids, test_ids;
  nlohmann::json metadata;  // free-form, preserved by save/load

  index_t type_count(const std::string& name) const {
    for (const auto& t : node_types)
      if (t.name == name) return t.count;
    throw std::out_of_range("unknown node type: " + name);
  }

  bool has_type(const std::string& name) const {
    for (const auto& t : node_types)
      if (t.name == name) return true;
    return false;
  }

  const Relation* find_relation(const std::string& name) const {
    for (const auto& r : relations)
      if (r.name == name) return &r;
    return nullptr;
  }

  index_t num_classes() const {
    index_t c = 0;
    for (index_t l : labels) c = std::max(c, l + 1);
    return c;
  }

  /// Total degree of every node of `type` summed over all incident
  /// relations (used as a deterministic tie-breaker).
  std::vector<index_t> type_degrees(const std::string& type) const {
    std::vector<index_t> deg(type_count(type), 0);
    for (const auto& r : relations) {
      if (r.src_type == type)
        for (index_t i = 0; i < r.adj.n_rows; ++i) deg[i] += r.adj.row_nnz(i);
      if (r.dst_type == type)
        for (index_t p = 0; p < r.adj.nnz(); ++p) deg[r.adj.col_idx[p]]++;
    }
    return deg;
  }
};

struct ValidationIssue {
  std::string where;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const {
    std::string s;
    for (const auto& i : issues) s += i.where + ": " + i.message + "\n";
    return s;
  }
};

/// Check every structural invariant; violations become report entries.
inline ValidationReport validate(const HeteroGraph& g) {
  ValidationReport rep;
  auto issue = [&rep](std::string where, std::string msg) {
    rep.issues.push_back({std::move(where), std::move(msg)});
  };

  std::map<std::string, index_t> counts;
  for (const auto& t : g.node_types) {
    if (counts.count(t.name)) issue("type " + t.name, "duplicate node type");
    if (t.count < 0) issue("type " + t.name, "negative node count");
    counts[t.name] = t.count;
  }

  if (!counts.count(g.target_type)) {
    issue("target", "target type '" + g.target_type + "' not declared");
  } else if (g.labels.size() != static_cast<std::size_t>(counts[g.target_type])) {
    issue("labels", "label array has " + std::to_string(g.labels.size()) +
                        " entries for " + std::to_string(counts[g.target_type]) +
                        " target nodes");
  }
  for (std::size_t i = 0; i < g.labels.size(); ++i)
    if (g.labels[i] < -1)
      issue("labels", "node " + std::to_string(i) + " has invalid class " +
                          std::to_string(g.labels[i]));

  std::map<std::string, int> rel_names;
  for (const auto& r : g.relations) {
    if (rel_names[r.name]++) issue("relation " + r.name, "duplicate relation name");
    if (!counts.count(r.src_type) || !counts.count(r.dst_type)) {
      issue("relation " + r.name, "endpoint type not declared");
      continue;
    }
    if (r.adj.n_rows != counts[r.src_type] || r.adj.n_cols != counts[r.dst_type])
      issue("relation " + r.name,
            "adjacency is " + std::to_string(r.adj.n_rows) + "x" +
                std::to_string(r.adj.n_cols) + ", expected " +
                std::to_string(counts[r.src_type]) + "x" +
                std::to_string(counts[r.dst_type]));
    if (static_cast<index_t>(r.adj.row_ptr.size()) != r.adj.n_rows + 1) {
      issue("relation " + r.name, "malformed row pointer array");
      continue;
    }
    for (index_t i = 0; i < r.adj.n_rows; ++i) {
      for (index_t p = r.adj.row_ptr[i]; p < r.adj.row_ptr[i + 1]; ++p) {
        index_t c = r.adj.col_idx[p];
        if (c < 0 || c >= r.adj.n_cols) {
          issue("relation " + r.name, "row " + std::to_string(i) +
                                          " has out-of-range column " + std::to_string(c));
        } else if (p > r.adj.row_ptr[i] && r.adj.col_idx[p - 1] >= c) {
          issue("relation " + r.name,
                "row " + std::to_string(i) + " columns not strictly increasing");
        }
      }
    }
    if (r.adj.has_values() && r.adj.vals.size() != r.adj.col_idx.size())
      issue("relation " + r.name, "value array length mismatch");
  }

  for (const auto& [type, fm] : g.features) {
    if (!counts.count(type)) {
      issue("features " + type, "features for undeclared type");
      continue;
    }
    if (fm.n_rows != counts[type])
      issue("features " + type, "feature matrix has " + std::to_string(fm.n_rows) +
                                    " rows for " + std::to_string(counts[type]) + " nodes");
    if (fm.data.size() != static_cast<std::size_t>(fm.n_rows * fm.n_cols))
      issue("features " + type, "feature buffer size mismatch");
    for (double v : fm.data)
      if (!std::isfinite(v)) {
        issue("features " + type, "non-finite feature value");
        break;
      }
  }

  auto check_split = [&](const char* name, const std::vector<index_t>& ids) {
    if (!counts.count(g.target_type)) return;
    for (index_t id : ids)
      if (id < 0 || id >= counts[g.target_type]) {
        issue(std::string("split ") + name, "id " + std::to_string(id) + " out of range");
        break;
      }
  };
  check_split("train", g.train_ids);
  check_split("valid", g.valid_ids);
  check_split("test", g.test_ids);

  return rep;
}

}  // namespace hetcond
