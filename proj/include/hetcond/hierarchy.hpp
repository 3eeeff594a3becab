#pragma once

#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hetcond/hetero_graph.hpp"

namespace hetcond {

enum class TypeRole { root, father, leaf };

inline const char* role_name(TypeRole r) {
  switch (r) {
    case TypeRole::root: return "root";
    case TypeRole::father: return "father";
    case TypeRole::leaf: return "leaf";
  }
  return "?";
}

struct TypeHierarchy {
  std::map<std::string, TypeRole> role;
  std::map<std::string, int> distance;  // schema hops from the target type

  /// Father types ordered root-outward (distance, then name).
  std::vector<std::string> fathers() const { return of_role(TypeRole::father); }
  std::vector<std::string> leaves() const { return of_role(TypeRole::leaf); }

 private:
  std::vector<std::string> of_role(TypeRole want) const {
    std::vector<std::pair<int, std::string>> picked;
    for (const auto& [t, r] : role)
      if (r == want) picked.emplace_back(distance.at(t), t);
    std::sort(picked.begin(), picked.end());
    std::vector<std::string> out;
    for (auto& [d, t] : picked) out.push_back(t);
    return out;
  }
};

namespace hierarchy_detail {

inline std::map<std::string, std::set<std::string>> schema_adjacency(const HeteroGraph& g) {
  std::map<std::string, std::set<std::string>> adj;
  for (const auto& t : g.node_types) adj[t.name];
  for (const auto& r : g.relations) {
    if (r.src_type == r.dst_type) continue;
    adj[r.src_type].insert(r.dst_type);
    adj[r.dst_type].insert(r.src_type);
  }
  return adj;
}

inline std::map<std::string, int> bfs_distances(
    const std::map<std::string, std::set<std::string>>& adj, const std::string& start,
    const std::string& skip = "") {
  std::map<std::string, int> dist;
  if (start == skip) return dist;
  std::deque<std::string> q{start};
  dist[start] = 0;
  while (!q.empty()) {
    std::string u = q.front();
    q.pop_front();
    for (const auto& v : adj.at(u)) {
      if (v == skip || dist.count(v)) continue;
      dist[v] = dist[u] + 1;
      q.push_back(v);
    }
  }
  return dist;
}

}  // namespace hierarchy_detail

/// Assign root/father/leaf roles by vertical position relative to the
/// target type: the target is the root; a type adjacent to the root, or
/// one whose removal disconnects some other type from the root, is a
/// father; everything else is a leaf.
inline TypeHierarchy classify_hierarchy(const HeteroGraph& g) {
  auto adj = hierarchy_detail::schema_adjacency(g);
  auto dist = hierarchy_detail::bfs_distances(adj, g.target_type);

  for (const auto& t : g.node_types)
    if (!dist.count(t.name))
      throw std::runtime_error("classify_hierarchy: type '" + t.name +
                               "' is unreachable from target '" + g.target_type + "'");

  TypeHierarchy h;
  h.distance = dist;
  for (const auto& t : g.node_types) {
    if (t.name == g.target_type) {
      h.role[t.name] = TypeRole::root;
      continue;
    }
    bool father = dist[t.name] == 1;
    if (!father) {
      // Cut check: does removing this type separate anything from the root?
      auto cut = hierarchy_detail::bfs_distances(adj, g.target_type, t.name);
      for (const auto& other : g.node_types)
        if (other.name != t.name && !cut.count(other.name)) {
          father = true;
          break;
        }
    }
    h.role[t.name] = father ? TypeRole::father : TypeRole::leaf;
  }
  return h;
}

/// Manual role overrides, one "<type> root|father|leaf" per line.
inline std::map<std::string, TypeRole> load_role_overrides(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read role file: " + path.string());
  std::map<std::string, TypeRole> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string type, role;
    if (!(ss >> type) || type[0] == '#') continue;
    if (!(ss >> role))
      throw std::runtime_error("role file line " + std::to_string(lineno) + ": missing role");
    if (role == "root")
      out[type] = TypeRole::root;
    else if (role == "father")
      out[type] = TypeRole::father;
    else if (role == "leaf")
      out[type] = TypeRole::leaf;
    else
      throw std::runtime_error("role file line " + std::to_string(lineno) + ": unknown role '" +
                               role + "'");
  }
  return out;
}

inline void apply_role_overrides(TypeHierarchy& h, const std::map<std::string, TypeRole>& ov,
                                 const HeteroGraph& g) {
  for (const auto& [type, role] : ov) {
    if (!g.has_type(type))
      throw std::runtime_error("role override for unknown type '" + type + "'");
    if (type == g.target_type && role != TypeRole::root)
      throw std::runtime_error("target type must stay root");
    if (type != g.target_type && role == TypeRole::root)
      throw std::runtime_error("only the target type may be root");
    h.role[type] = role;
  }
}

}  // namespace hetcond
