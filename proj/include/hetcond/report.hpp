#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hetcond/aux_condense.hpp"
#include "hetcond/hierarchy.hpp"
#include "hetcond/selection.hpp"

namespace hetcond {

inline constexpr int kReportFormatVersion = 1;

struct MetaPathReport {
  std::string name;
  std::string steps;
  index_t nnz = 0;
  double density = 0.0;
};

struct CondensationReport {
  std::string method;  // "metapath" or "random"
  nlohmann::json config;
  std::map<std::string, index_t> original_counts;
  std::map<std::string, index_t> condensed_counts;
  std::map<std::string, std::string> roles;
  std::map<index_t, index_t> class_before;  // target class -> count (pool)
  std::map<index_t, index_t> class_after;
  SelectionBudget target_budget;
  std::vector<MetaPathReport> metapaths;
  ScoreTable score_table;
  std::vector<TypeCondensation> other_types;
  std::map<std::string, double> timings_ms;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format_version"] = kReportFormatVersion;
    j["method"] = method;
    j["config"] = config;
    j["original_counts"] = original_counts;
    j["condensed_counts"] = condensed_counts;
    j["roles"] = roles;
    auto class_map = [](const std::map<index_t, index_t>& m) {
      nlohmann::json o = nlohmann::json::object();
      for (auto& [c, n] : m) o[std::to_string(c)] = n;
      return o;
    };
    j["class_distribution"]["before"] = class_map(class_before);
    j["class_distribution"]["after"] = class_map(class_after);
    j["target_budget"]["total"] = target_budget.total;
    j["target_budget"]["ratio"] = target_budget.ratio;
    j["target_budget"]["per_class"] = class_map(target_budget.per_class);
    j["metapaths"] = nlohmann::json::array();
    for (const auto& m : metapaths)
      j["metapaths"].push_back(
          {{"name", m.name}, {"steps", m.steps}, {"nnz", m.nnz}, {"density", m.density}});
    j["selection"] = nlohmann::json::array();
    for (const auto& ps : score_table.paths) {
      nlohmann::json p;
      p["path"] = ps.path_name;
      p["steps"] = ps.step_names;
      p["universe"] = ps.universe;
      p["singleton_group"] = ps.singleton_group;
      p["picks"] = nlohmann::json::array();
      for (const auto& e : ps.entries)
        p["picks"].push_back({{"node", e.node},
                              {"class", e.cls},
                              {"coverage_gain", e.coverage_gain},
                              {"diversity", e.diversity},
                              {"f_gain", e.f_gain},
                              {"f_after", e.f_after},
                              {"covered_after", e.covered_after}});
      j["selection"].push_back(std::move(p));
    }
    j["other_types"] = nlohmann::json::array();
    for (const auto& t : other_types) {
      nlohmann::json o;
      o["type"] = t.type;
      o["role"] = role_name(t.role);
      o["original"] = t.original;
      o["budget"] = t.budget;
      o["condensed"] = t.condensed;
      o["full_budget"] = t.full_budget;
      o["no_anchor_warning"] = t.no_anchor_warning;
      o["top_scores"] = nlohmann::json::array();
      for (auto& [id, s] : t.top_scores) o["top_scores"].push_back({{"node", id}, {"score", s}});
      o["merges"] = nlohmann::json::array();
      for (auto& m : t.merges)
        o["merges"].push_back({{"absorbed_anchor", m.absorbed_anchor},
                               {"into_anchor", m.into_anchor},
                               {"shared_fathers", m.shared_fathers}});
      j["other_types"].push_back(std::move(o));
    }
    j["timings_ms"] = timings_ms;
    return j;
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "condensation report (method: " << method << ")\n";
    os << "node counts:\n";
    for (const auto& [type, n] : original_counts) {
      auto it = condensed_counts.find(type);
      os << "  " << type << ": " << n << " -> " << (it != condensed_counts.end() ? it->second : 0);
      auto rit = roles.find(type);
      if (rit != roles.end()) os << "  (" << rit->second << ")";
      os << "\n";
    }
    os << "target budget: " << target_budget.total << " (ratio " << target_budget.ratio << ")\n";
    os << "class distribution (pool -> condensed):\n";
    for (const auto& [c, n] : class_before) {
      auto it = class_after.find(c);
      os << "  class " << c << ": " << n << " -> " << (it != class_after.end() ? it->second : 0)
         << "\n";
    }
    os << "meta-paths (" << metapaths.size() << "):\n";
    for (const auto& m : metapaths)
      os << "  " << m.name << " [" << m.steps << "] nnz=" << m.nnz << " density=" << m.density
         << "\n";
    for (const auto& t : other_types) {
      os << t.type << " (" << role_name(t.role) << "): budget " << t.budget << ", condensed "
         << t.condensed;
      if (t.full_budget) os << " [full budget, kept all]";
      if (t.no_anchor_warning) os << " [warning: no edges to kept fathers]";
      os << "\n";
      if (!t.top_scores.empty()) {
        os << "  top scores:";
        for (auto& [id, s] : t.top_scores) os << " " << id << ":" << s;
        os << "\n";
      }
      for (auto& m : t.merges)
        os << "  merge: anchor " << m.absorbed_anchor << " -> anchor " << m.into_anchor
           << " (shared fathers " << m.shared_fathers << ")\n";
    }
    for (const auto& [stage, ms] : timings_ms) os << "time " << stage << ": " << ms << " ms\n";
    return os.str();
  }
};

}  // namespace hetcond
