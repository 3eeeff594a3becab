#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hetcond/aux_condense.hpp"
#include "hetcond/hetero_graph.hpp"

namespace hetcond {

/// New-id -> original-id tables per kept type, plus hyper-node definitions
/// per synthesized type.
struct RemapTable {
  std::map<std::string, std::vector<index_t>> kept;            // new id -> original id
  std::map<std::string, std::vector<HyperNode>> hyper;         // new id = position

  nlohmann::json to_json() const {
    nlohmann::json j;
    for (const auto& [type, ids] : kept) j["kept"][type] = ids;
    for (const auto& [type, nodes] : hyper) {
      auto& arr = j["hyper"][type] = nlohmann::json::array();
      for (const auto& h : nodes) {
        nlohmann::json n;
        n["id"] = h.id;
        n["members"] = h.members;
        n["anchor_type"] = h.anchor_type;
        n["anchor_id"] = h.anchor_id;
        arr.push_back(std::move(n));
      }
    }
    return j;
  }
};

struct InducedGraph {
  HeteroGraph graph;
  RemapTable remap;
};

/// Materialize the condensed graph: kept nodes are densely re-indexed in
/// list order, edges between two kept nodes survive, hyper-node edges are
/// added from their father links, features copy through (hyper rows take
/// the synthesized mean). The remap table records provenance.
inline InducedGraph induce_subgraph(const HeteroGraph& g,
                                    const std::map<std::string, std::vector<index_t>>& kept,
                                    const std::vector<HyperNode>& hyper = {}) {
  InducedGraph out;
  HeteroGraph& c = out.graph;

  std::map<std::string, std::vector<HyperNode>> hyper_by_type;
  for (const auto& h : hyper) hyper_by_type[h.leaf_type].push_back(h);

  // New node counts and per-type old->new maps.
  std::map<std::string, std::vector<index_t>> old_to_new;
  for (const auto& t : g.node_types) {
    auto kit = kept.find(t.name);
    auto hit = hyper_by_type.find(t.name);
    if (kit == kept.end() && hit == hyper_by_type.end())
      throw std::invalid_argument("induce_subgraph: type '" + t.name +
                                  "' neither kept nor synthesized");
    if (kit != kept.end() && hit != hyper_by_type.end() && !kit->second.empty())
      throw std::invalid_argument("induce_subgraph: type '" + t.name +
                                  "' has both kept nodes and hyper-nodes");
    index_t new_count = 0;
    if (hit != hyper_by_type.end()) {
      new_count = static_cast<index_t>(hit->second.size());
      out.remap.hyper[t.name] = hit->second;
    } else {
      auto& map = old_to_new[t.name];
      map.assign(t.count, -1);
      for (index_t new_id = 0; new_id < static_cast<index_t>(kit->second.size()); ++new_id) {
        index_t old_id = kit->second[new_id];
        if (old_id < 0 || old_id >= t.count)
          throw std::invalid_argument("induce_subgraph: kept id " + std::to_string(old_id) +
                                      " out of range for type " + t.name);
        if (map[old_id] != -1)
          throw std::invalid_argument("induce_subgraph: duplicate kept id for type " + t.name);
        map[old_id] = new_id;
      }
      new_count = static_cast<index_t>(kit->second.size());
      out.remap.kept[t.name] = kit->second;
    }
    c.node_types.push_back({t.name, new_count});
  }
  c.target_type = g.target_type;

  // Hyper-node lookup: (leaf type, relation, father old id) -> hyper ids.
  std::map<std::string, std::map<std::pair<std::string, index_t>, std::vector<index_t>>>
      hyper_edges;
  for (const auto& [type, nodes] : hyper_by_type) {
    auto& idx = hyper_edges[type];
    for (const auto& h : nodes)
      for (const auto& [rel, father] : h.relation_edges) idx[{rel, father}].push_back(h.id);
  }

  for (const auto& r : g.relations) {
    bool src_hyper = hyper_by_type.count(r.src_type) > 0;
    bool dst_hyper = hyper_by_type.count(r.dst_type) > 0;
    std::vector<std::pair<index_t, index_t>> edges;

    if (!src_hyper && !dst_hyper) {
      const auto& smap = old_to_new[r.src_type];
      const auto& dmap = old_to_new[r.dst_type];
      for (index_t i = 0; i < r.adj.n_rows; ++i) {
        if (smap[i] < 0) continue;
        for (index_t j : r.adj.row(i))
          if (dmap[j] >= 0) edges.emplace_back(smap[i], dmap[j]);
      }
    } else if (src_hyper != dst_hyper) {
      const std::string& leaf = src_hyper ? r.src_type : r.dst_type;
      const std::string& father = src_hyper ? r.dst_type : r.src_type;
      const auto& fmap = old_to_new[father];
      auto eit = hyper_edges.find(leaf);
      if (eit != hyper_edges.end()) {
        for (const auto& [key, hyper_ids] : eit->second) {
          if (key.first != r.name) continue;
          index_t f_new = fmap[key.second];
          if (f_new < 0)
            throw std::invalid_argument("induce_subgraph: hyper-node references dropped " +
                                        father + " node " + std::to_string(key.second));
          for (index_t h : hyper_ids)
            edges.emplace_back(src_hyper ? h : f_new, src_hyper ? f_new : h);
        }
      }
    }
    // Relations between two synthesized types keep no edges.

    c.relations.push_back(
        {r.name, r.src_type, r.dst_type,
         Csr::from_coo(c.type_count(r.src_type), c.type_count(r.dst_type), std::move(edges))});
  }

  // Features: kept rows copied bit-exact, hyper rows take the mean feature.
  for (const auto& [type, fm] : g.features) {
    if (hyper_by_type.count(type)) {
      const auto& nodes = hyper_by_type[type];
      FeatureMatrix nf;
      nf.n_rows = static_cast<index_t>(nodes.size());
      nf.n_cols = fm.n_cols;
      nf.data.resize(static_cast<std::size_t>(nf.n_rows) * nf.n_cols);
      for (const auto& h : nodes)
        std::copy(h.feature.begin(), h.feature.end(), nf.data.begin() + h.id * nf.n_cols);
      c.features.emplace(type, std::move(nf));
    } else {
      const auto& ids = kept.at(type);
      FeatureMatrix nf;
      nf.n_rows = static_cast<index_t>(ids.size());
      nf.n_cols = fm.n_cols;
      nf.data.reserve(static_cast<std::size_t>(nf.n_rows) * nf.n_cols);
      for (index_t old_id : ids) {
        auto row = fm.row(old_id);
        nf.data.insert(nf.data.end(), row.begin(), row.end());
      }
      c.features.emplace(type, std::move(nf));
    }
  }

  // Labels and splits follow the target remap.
  const auto& tmap = old_to_new.at(g.target_type);
  c.labels.assign(c.type_count(g.target_type), -1);
  for (std::size_t old_id = 0; old_id < g.labels.size(); ++old_id)
    if (tmap[old_id] >= 0) c.labels[tmap[old_id]] = g.labels[old_id];
  auto remap_split = [&](const std::vector<index_t>& ids) {
    std::vector<index_t> out_ids;
    for (index_t id : ids)
      if (tmap[id] >= 0) out_ids.push_back(tmap[id]);
    return out_ids;
  };
  c.train_ids = remap_split(g.train_ids);
  c.valid_ids = remap_split(g.valid_ids);
  c.test_ids = remap_split(g.test_ids);

  c.metadata = g.metadata;
  c.metadata["provenance"] = out.remap.to_json();

  return out;
}

}  // namespace hetcond
