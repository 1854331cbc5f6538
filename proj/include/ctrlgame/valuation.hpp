#pragma once

// Cost, budget rule and effectiveness of combinations, and the game matrix.
// Everything here is exact: Money for costs, Rational for effectiveness.

#include <map>
#include <vector>

#include "ctrlgame/algebra.hpp"
#include "ctrlgame/catalogue.hpp"
#include "ctrlgame/numeric.hpp"

namespace ctrlgame {

struct Budget {
  Money limit;

  static Budget parse(std::string_view text) { return Budget{Money::parse(text)}; }
  friend bool operator==(const Budget&, const Budget&) = default;
};

/// Sum of member costs; the empty combination costs 0.
inline Money cost(const Combination& c, const ControlCatalogue& cat) {
  Money total;
  for (const auto& id : c) total += cat.at(id).cost;
  return total;
}

inline bool is_valid(const Combination& c, const ControlCatalogue& cat, const Budget& b) {
  return cost(c, cat) <= b.limit;
}

/// 1 - prod(1 - e_i) over the combination's atoms. Atoms are a set, so a
/// control shared by both operands of a composition counts once.
inline Rational eff(const Combination& c, const ObjectiveRef& target, const Case& case_, const ControlCatalogue& cat) {
  Rational miss = 1;
  for (const auto& id : c) {
    auto r = resolve_rating(cat.at(id), target, case_);
    if (r != Rating::None) miss *= Rational(complement_tenths(r), 10);
  }
  return 1 - miss;
}

struct GameMatrixRow {
  Combination combo;
  Money cost;
  std::map<ObjectiveRef, Rational> payoffs;
};

/// One row per budget-valid combination of `family` (expected to be filtered
/// by requirements already), with a payoff for every catalogue target.
inline std::vector<GameMatrixRow> game_matrix(const NormalFamily& family, const Case& case_,
                                              const ControlCatalogue& cat, const Budget& b) {
  std::vector<GameMatrixRow> rows;
  auto targets = cat.targets();
  for (const auto& combo : family.combos) {
    auto c = cost(combo, cat);
    if (c > b.limit) continue;
    GameMatrixRow row{combo, c, {}};
    for (const auto& t : targets) row.payoffs.emplace(t, eff(combo, t, case_, cat));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ctrlgame
