#pragma once

// Suggested-controls report: cases with identical results are grouped and
// printed together, each group listing the uncertainty resolutions behind it.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "ctrlgame/catalogue.hpp"
#include "ctrlgame/catalogue_io.hpp"
#include "ctrlgame/numeric.hpp"
#include "ctrlgame/profile.hpp"
#include "ctrlgame/solver.hpp"
#include "ctrlgame/valuation.hpp"

namespace ctrlgame {

struct ReportAssignment {
  std::size_t case_id = 0;
  std::string control;
  ObjectiveRef target;
  Rating rating = Rating::None;

  friend bool operator==(const ReportAssignment&, const ReportAssignment&) = default;
};

struct ReportGroup {
  std::vector<std::size_t> cases;  // 1-based case ids, ascending
  std::vector<ReportAssignment> assignments;
  bool feasible = false;
  std::vector<std::vector<std::string>> combos;
  Money cost;
  std::vector<Rational> tier_scores;

  friend bool operator==(const ReportGroup&, const ReportGroup&) = default;
};

struct ReportMetadata {
  Budget budget;
  AttackerProfile profile;
  std::string catalogue_digest;
  std::size_t case_count = 0;

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct ReportDocument {
  ReportMetadata metadata;
  std::vector<ReportGroup> groups;

  friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

/// Groups cases by exact equality of their solutions. Group order follows the
/// lowest member case id.
inline ReportDocument build_report(const SolveOutcome& outcome, const ControlCatalogue& cat, const Budget& budget,
                                   const AttackerProfile& profile) {
  ReportDocument doc;
  doc.metadata = {budget, profile, catalogue_digest(cat), outcome.cases.size()};
  std::vector<std::size_t> group_of(outcome.cases.size(), SIZE_MAX);
  std::vector<std::size_t> representative;
  for (std::size_t i = 0; i < outcome.cases.size(); ++i) {
    const auto& sol = outcome.cases[i];
    std::size_t g = 0;
    while (g < representative.size() && !outcome.cases[representative[g]].same_result(sol)) ++g;
    if (g == representative.size()) {
      representative.push_back(i);
      ReportGroup group;
      group.feasible = sol.feasible;
      if (sol.feasible) {
        group.cost = sol.cost;
        group.tier_scores = sol.tier_scores;
        for (const auto& combo : sol.combos) {
          std::vector<std::string> ids;
          for (const auto& id : combo) ids.push_back(id.str());
          group.combos.push_back(std::move(ids));
        }
      }
      doc.groups.push_back(std::move(group));
    }
    auto& group = doc.groups[g];
    group.cases.push_back(i + 1);
    for (const auto& [key, rating] : sol.case_.assignment)
      group.assignments.push_back({i + 1, key.control.str(), key.target, rating});
  }
  // Assignments within a case follow enumeration order, not map order.
  auto cells = cat.uncertain_cells();
  for (auto& group : doc.groups) {
    std::stable_sort(group.assignments.begin(), group.assignments.end(),
                     [&](const ReportAssignment& a, const ReportAssignment& b) {
                       if (a.case_id != b.case_id) return a.case_id < b.case_id;
                       auto pos = [&](const ReportAssignment& x) {
                         return std::find_if(cells.begin(), cells.end(), [&](const CellKey& k) {
                                  return k.control.str() == x.control && k.target == x.target;
                                }) - cells.begin();
                       };
                       return pos(a) < pos(b);
                     });
  }
  return doc;
}

inline nlohmann::json report_to_json(const ReportDocument& doc) {
  using nlohmann::json;
  json groups = json::array();
  for (const auto& g : doc.groups) {
    json assignments = json::array();
    for (const auto& a : g.assignments)
      assignments.push_back({{"case", a.case_id},
                             {"control", a.control},
                             {"asset", a.target.asset},
                             {"objective", std::string(1, to_char(a.target.objective))},
                             {"rating", std::string(to_string(a.rating))}});
    json scores = json::array();
    for (const auto& s : g.tier_scores)
      scores.push_back({{"exact", to_fraction_string(s)}, {"approx", to_decimal_string(s)}});
    groups.push_back({{"cases", g.cases},
                      {"assignments", std::move(assignments)},
                      {"feasible", g.feasible},
                      {"combos", g.combos},
                      {"cost", g.feasible ? json(g.cost.to_string()) : json(nullptr)},
                      {"tier_scores", std::move(scores)}});
  }
  json meta = {{"budget", doc.metadata.budget.limit.to_string()},
               {"profile", profile_to_json(doc.metadata.profile)},
               {"catalogue_digest", doc.metadata.catalogue_digest},
               {"case_count", doc.metadata.case_count}};
  return {{"metadata", std::move(meta)}, {"groups", std::move(groups)}};
}

inline ReportDocument report_from_json(const nlohmann::json& j) {
  try {
    ReportDocument doc;
    const auto& meta = j.at("metadata");
    doc.metadata.budget = Budget::parse(meta.at("budget").get<std::string>());
    doc.metadata.profile = profile_from_json(meta.at("profile"));
    doc.metadata.catalogue_digest = meta.at("catalogue_digest").get<std::string>();
    doc.metadata.case_count = meta.at("case_count").get<std::size_t>();
    for (const auto& g : j.at("groups")) {
      ReportGroup group;
      group.cases = g.at("cases").get<std::vector<std::size_t>>();
      for (const auto& a : g.at("assignments")) {
        auto objective = parse_objective(a.at("objective").get<std::string>());
        auto rating = parse_rating(a.at("rating").get<std::string>());
        if (!objective || !rating) throw ParseError(0, "assignments", "bad objective or rating");
        group.assignments.push_back(
            {a.at("case").get<std::size_t>(), a.at("control").get<std::string>(), {a.at("asset").get<std::string>(), *objective}, *rating});
      }
      group.feasible = g.at("feasible").get<bool>();
      group.combos = g.at("combos").get<std::vector<std::vector<std::string>>>();
      if (group.feasible) group.cost = Money::parse(g.at("cost").get<std::string>());
      for (const auto& s : g.at("tier_scores")) group.tier_scores.push_back(parse_fraction(s.at("exact").get<std::string>()));
      doc.groups.push_back(std::move(group));
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, "", std::string("malformed report JSON: ") + e.what());
  }
}

enum class ReportFormat { Text, Json };

inline std::string render_text(const ReportDocument& doc) {
  std::string out = "Suggested security control combinations\n";
  out += "Budget: " + doc.metadata.budget.limit.to_string() + "\n";
  out += "Attacker profile:\n";
  for (std::size_t j = 0; j < doc.metadata.profile.tiers.size(); ++j) {
    out += "  Tier " + std::to_string(j + 1) + ":";
    for (const auto& t : doc.metadata.profile.tiers[j].targets) out += " " + t.label();
    out += "\n";
  }
  out += "Cases: " + std::to_string(doc.metadata.case_count) + "\n";
  for (const auto& g : doc.groups) {
    out += "\nCase(s): ";
    for (std::size_t k = 0; k < g.cases.size(); ++k) out += (k ? ", " : "") + std::to_string(g.cases[k]);
    out += "\n";
    std::size_t current = 0;
    for (const auto& a : g.assignments) {
      if (a.case_id != current) {
        current = a.case_id;
        out += "  Case " + std::to_string(current) + ":";
      } else {
        out += ";";
      }
      out += " " + a.control + " " + a.target.label() + " = " + std::string(to_string(a.rating));
      auto next = &a + 1;
      if (next == g.assignments.data() + g.assignments.size() || next->case_id != current) out += "\n";
    }
    if (!g.feasible) {
      out += "  No feasible combination within budget\n";
      continue;
    }
    for (std::size_t k = 0; k < g.combos.size(); ++k) {
      out += "  Combination " + std::to_string(k + 1) + " (" + std::to_string(g.combos[k].size()) + " controls):";
      for (std::size_t m = 0; m < g.combos[k].size(); ++m) out += (m ? ", " : " ") + g.combos[k][m];
      out += "\n";
    }
    out += "  Cost: " + g.cost.to_string() + "\n";
    for (std::size_t j = 0; j < g.tier_scores.size(); ++j)
      out += "  Tier " + std::to_string(j + 1) + " score: " + to_decimal_string(g.tier_scores[j]) + " (" +
             to_fraction_string(g.tier_scores[j]) + ")\n";
  }
  return out;
}

inline std::string render(const ReportDocument& doc, ReportFormat format) {
  if (format == ReportFormat::Json) return report_to_json(doc).dump(2) + "\n";
  return render_text(doc);
}

}  // namespace ctrlgame
