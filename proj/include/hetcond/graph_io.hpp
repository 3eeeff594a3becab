#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hetcond/hetero_graph.hpp"

namespace hetcond {

struct load_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace io_detail {

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<index_t> read_id_list(const std::filesystem::path& path) {
  std::vector<index_t> ids;
  std::ifstream in(path);
  if (!in) return ids;  // split files are optional
  index_t id;
  while (in >> id) ids.push_back(id);
  return ids;
}

inline void write_id_list(const std::filesystem::path& path, const std::vector<index_t>& ids) {
  std::ofstream out(path);
  if (!out) throw load_error("cannot write " + path.string());
  for (index_t id : ids) out << id << "\n";
}

}  // namespace io_detail

/// Directory layout:
///   schema            type/target/relation declarations
///   <relation>.edges  "src dst" per line
///   <type>.features   header "<rows> <cols>", then one row per line
///   labels            "node_id class_id" per line
///   train/valid/test  one node id per line
///   meta.json         optional free-form metadata
inline HeteroGraph load_graph(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  HeteroGraph g;

  fs::path schema_path = dir / "schema";
  std::ifstream schema(schema_path);
  if (!schema) throw load_error("missing schema file: " + schema_path.string());

  struct RelDecl {
    std::string name, src, dst;
  };
  std::vector<RelDecl> rels;
  std::string line;
  int lineno = 0;
  while (std::getline(schema, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind) || kind[0] == '#') continue;
    if (kind == "type") {
      NodeTypeInfo t;
      if (!(ss >> t.name >> t.count))
        throw load_error("schema line " + std::to_string(lineno) + ": bad type declaration");
      g.node_types.push_back(t);
    } else if (kind == "target") {
      if (!(ss >> g.target_type))
        throw load_error("schema line " + std::to_string(lineno) + ": bad target declaration");
    } else if (kind == "relation") {
      RelDecl r;
      if (!(ss >> r.name >> r.src >> r.dst))
        throw load_error("schema line " + std::to_string(lineno) + ": bad relation declaration");
      rels.push_back(r);
    } else {
      throw load_error("schema line " + std::to_string(lineno) + ": unknown keyword '" + kind + "'");
    }
  }
  if (g.target_type.empty()) throw load_error("schema declares no target type");
  if (!g.has_type(g.target_type))
    throw load_error("target type '" + g.target_type + "' is not declared");

  for (const auto& rd : rels) {
    if (!g.has_type(rd.src) || !g.has_type(rd.dst))
      throw load_error("relation " + rd.name + ": undeclared endpoint type");
    fs::path epath = dir / (rd.name + ".edges");
    std::ifstream in(epath);
    if (!in) throw load_error("relation " + rd.name + ": missing edge file " + epath.string());
    index_t n_src = g.type_count(rd.src), n_dst = g.type_count(rd.dst);
    std::vector<std::pair<index_t, index_t>> edges;
    int eline = 0;
    while (std::getline(in, line)) {
      ++eline;
      if (line.empty()) continue;
      std::istringstream ss(line);
      index_t s, d;
      if (!(ss >> s >> d))
        throw load_error("relation " + rd.name + " line " + std::to_string(eline) +
                         ": expected 'src dst'");
      if (s < 0 || s >= n_src)
        throw load_error("relation " + rd.name + " line " + std::to_string(eline) +
                         ": src id " + std::to_string(s) + " out of range [0," +
                         std::to_string(n_src) + ")");
      if (d < 0 || d >= n_dst)
        throw load_error("relation " + rd.name + " line " + std::to_string(eline) +
                         ": dst id " + std::to_string(d) + " out of range [0," +
                         std::to_string(n_dst) + ")");
      edges.emplace_back(s, d);
    }
    g.relations.push_back({rd.name, rd.src, rd.dst, Csr::from_coo(n_src, n_dst, std::move(edges))});
  }

  for (const auto& t : g.node_types) {
    fs::path fpath = dir / (t.name + ".features");
    std::ifstream in(fpath);
    if (!in) continue;  // features are optional per type
    FeatureMatrix fm;
    if (!(in >> fm.n_rows >> fm.n_cols))
      throw load_error("features " + t.name + ": bad header");
    if (fm.n_rows != t.count)
      throw load_error("features " + t.name + ": " + std::to_string(fm.n_rows) +
                       " rows declared for " + std::to_string(t.count) + " nodes");
    fm.data.resize(static_cast<std::size_t>(fm.n_rows) * fm.n_cols);
    for (auto& v : fm.data)
      if (!(in >> v)) throw load_error("features " + t.name + ": truncated data");
    g.features.emplace(t.name, std::move(fm));
  }

  g.labels.assign(g.type_count(g.target_type), -1);
  {
    std::ifstream in(dir / "labels");
    if (in) {
      index_t id, cls;
      int lline = 0;
      while (in >> id >> cls) {
        ++lline;
        if (id < 0 || id >= static_cast<index_t>(g.labels.size()))
          throw load_error("labels line " + std::to_string(lline) + ": id " +
                           std::to_string(id) + " out of range");
        g.labels[id] = cls;
      }
    }
  }
  g.train_ids = io_detail::read_id_list(dir / "train");
  g.valid_ids = io_detail::read_id_list(dir / "valid");
  g.test_ids = io_detail::read_id_list(dir / "test");

  {
    std::ifstream in(dir / "meta.json");
    if (in) g.metadata = nlohmann::json::parse(in);
  }

  auto rep = validate(g);
  if (!rep.ok()) throw load_error("validation failed:\n" + rep.to_string());
  return g;
}

inline void save_graph(const HeteroGraph& g, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw load_error("cannot create directory " + dir.string() + ": " + ec.message());

  {
    std::ofstream out(dir / "schema");
    if (!out) throw load_error("cannot write " + (dir / "schema").string());
    for (const auto& t : g.node_types) out << "type " << t.name << " " << t.count << "\n";
    out << "target " << g.target_type << "\n";
    for (const auto& r : g.relations)
      out << "relation " << r.name << " " << r.src_type << " " << r.dst_type << "\n";
  }

  for (const auto& r : g.relations) {
    std::ofstream out(dir / (r.name + ".edges"));
    if (!out) throw load_error("cannot write edges for " + r.name);
    for (index_t i = 0; i < r.adj.n_rows; ++i)
      for (index_t c : r.adj.row(i)) out << i << " " << c << "\n";
  }

  for (const auto& [type, fm] : g.features) {
    std::ofstream out(dir / (type + ".features"));
    if (!out) throw load_error("cannot write features for " + type);
    out << fm.n_rows << " " << fm.n_cols << "\n";
    for (index_t i = 0; i < fm.n_rows; ++i) {
      for (index_t j = 0; j < fm.n_cols; ++j) {
        if (j) out << " ";
        out << io_detail::fmt_double(fm.data[i * fm.n_cols + j]);
      }
      out << "\n";
    }
  }

  {
    std::ofstream out(dir / "labels");
    if (!out) throw load_error("cannot write labels");
    for (std::size_t i = 0; i < g.labels.size(); ++i)
      if (g.labels[i] >= 0) out << i << " " << g.labels[i] << "\n";
  }
  io_detail::write_id_list(dir / "train", g.train_ids);
  io_detail::write_id_list(dir / "valid", g.valid_ids);
  io_detail::write_id_list(dir / "test", g.test_ids);

  if (!g.metadata.is_null()) {
    std::ofstream out(dir / "meta.json");
    if (!out) throw load_error("cannot write meta.json");
    out << g.metadata.dump(2) << "\n";
  }
}

/// Structural equality: same schema, edges, labels, splits, and bit-exact
/// features. Metadata is compared as parsed JSON.
inline bool graphs_equal(const HeteroGraph& a, const HeteroGraph& b) {
  if (a.node_types.size() != b.node_types.size()) return false;
  for (std::size_t i = 0; i < a.node_types.size(); ++i)
    if (a.node_types[i].name != b.node_types[i].name ||
        a.node_types[i].count != b.node_types[i].count)
      return false;
  if (a.target_type != b.target_type) return false;
  if (a.relations.size() != b.relations.size()) return false;
  for (std::size_t i = 0; i < a.relations.size(); ++i) {
    const auto& ra = a.relations[i];
    const auto& rb = b.relations[i];
    if (ra.name != rb.name || ra.src_type != rb.src_type || ra.dst_type != rb.dst_type)
      return false;
    if (!ra.adj.same_pattern(rb.adj)) return false;
  }
  if (a.features.size() != b.features.size()) return false;
  for (const auto& [type, fa] : a.features) {
    auto it = b.features.find(type);
    if (it == b.features.end()) return false;
    if (fa.n_rows != it->second.n_rows || fa.n_cols != it->second.n_cols ||
        fa.data != it->second.data)
      return false;
  }
  return a.labels == b.labels && a.train_ids == b.train_ids && a.valid_ids == b.valid_ids &&
         a.test_ids == b.test_ids && a.metadata == b.metadata;
}

}  // namespace hetcond
