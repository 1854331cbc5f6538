#pragma once

// Control catalogue: controls with cost, mandatory flag, dependencies and
// per-(asset, objective) effectiveness ratings, some of them uncertain.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctrlgame/algebra.hpp"
#include "ctrlgame/error.hpp"
#include "ctrlgame/numeric.hpp"

namespace ctrlgame {

enum class Rating : std::uint8_t { None, Low, Medium, High, VeryHigh };

inline constexpr Rating kAllRatings[] = {Rating::None, Rating::Low, Rating::Medium, Rating::High, Rating::VeryHigh};

inline std::string_view to_string(Rating r) {
  switch (r) {
    case Rating::None: return "None";
    case Rating::Low: return "Low";
    case Rating::Medium: return "Medium";
    case Rating::High: return "High";
    case Rating::VeryHigh: return "VeryHigh";
  }
  return "None";
}

/// Case-insensitive; "Very High" is accepted for VeryHigh.
inline std::optional<Rating> parse_rating(std::string_view text) {
  std::string key;
  for (char c : text)
    if (c != ' ' && c != '\t') key += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  if (key == "none") return Rating::None;
  if (key == "low") return Rating::Low;
  if (key == "medium") return Rating::Medium;
  if (key == "high") return Rating::High;
  if (key == "veryhigh") return Rating::VeryHigh;
  return std::nullopt;
}

/// 1 - value, in tenths: None 10, Low 8, Medium 5, High 2, VeryHigh 1.
inline constexpr int complement_tenths(Rating r) {
  switch (r) {
    case Rating::None: return 10;
    case Rating::Low: return 8;
    case Rating::Medium: return 5;
    case Rating::High: return 2;
    case Rating::VeryHigh: return 1;
  }
  return 10;
}

/// None 0, Low 1/5, Medium 1/2, High 4/5, VeryHigh 9/10. Nothing maps to 1.
inline Rational rating_value(Rating r) { return Rational(10 - complement_tenths(r), 10); }

enum class Objective : std::uint8_t { C, I, A };

inline constexpr Objective kObjectives[] = {Objective::C, Objective::I, Objective::A};

inline char to_char(Objective o) { return o == Objective::C ? 'C' : o == Objective::I ? 'I' : 'A'; }

inline std::optional<Objective> parse_objective(std::string_view s) {
  if (s == "C") return Objective::C;
  if (s == "I") return Objective::I;
  if (s == "A") return Objective::A;
  return std::nullopt;
}

struct ObjectiveRef {
  std::string asset;
  Objective objective = Objective::C;

  std::string label() const { return asset + ":" + to_char(objective); }

  friend bool operator==(const ObjectiveRef&, const ObjectiveRef&) = default;
  friend auto operator<=>(const ObjectiveRef&, const ObjectiveRef&) = default;
};

/// One or more distinct ratings; more than one records analyst uncertainty.
class EffectivenessCell {
 public:
  EffectivenessCell() : options_{Rating::None} {}
  explicit EffectivenessCell(Rating r) : options_{r} {}
  explicit EffectivenessCell(std::vector<Rating> options) : options_(std::move(options)) {
    if (options_.empty()) throw Error(ErrorCode::InvalidArgument, "effectiveness cell without ratings");
    for (std::size_t i = 0; i < options_.size(); ++i)
      for (std::size_t j = i + 1; j < options_.size(); ++j)
        if (options_[i] == options_[j])
          throw Error(ErrorCode::InvalidArgument,
                      "duplicate rating '" + std::string(to_string(options_[i])) + "' in effectiveness cell");
  }

  const std::vector<Rating>& options() const noexcept { return options_; }
  bool uncertain() const noexcept { return options_.size() > 1; }
  bool is_none() const noexcept { return options_.size() == 1 && options_[0] == Rating::None; }

  friend bool operator==(const EffectivenessCell&, const EffectivenessCell&) = default;

 private:
  std::vector<Rating> options_;
};

struct ControlEntry {
  ControlId id;
  std::string name;
  Money cost;
  bool mandatory = false;
  /// Each element is one consequent: this control requires all of its atoms.
  std::vector<Combination> dependencies;
  /// Cells equal to a single None are never stored.
  std::map<ObjectiveRef, EffectivenessCell> effectiveness;

  const EffectivenessCell* cell(const ObjectiveRef& ref) const {
    auto it = effectiveness.find(ref);
    return it == effectiveness.end() ? nullptr : &it->second;
  }

  friend bool operator==(const ControlEntry&, const ControlEntry&) = default;
};

/// An uncertain cell: which control, and which (asset, objective).
struct CellKey {
  ControlId control;
  ObjectiveRef target;

  friend bool operator==(const CellKey&, const CellKey&) = default;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

/// One resolution of every uncertain cell to a single rating.
struct Case {
  std::map<CellKey, Rating> assignment;

  friend bool operator==(const Case&, const Case&) = default;
};

inline constexpr std::uint64_t kDefaultCaseLimit = 4096;

class ControlCatalogue {
 public:
  ControlCatalogue() = default;

  /// Validates and freezes the catalogue. Cells rated exactly None are
  /// dropped so that missing and explicit None compare equal.
  ControlCatalogue(std::vector<std::string> assets, std::vector<ControlEntry> controls)
      : assets_(std::move(assets)), controls_(std::move(controls)) {
    if (assets_.empty()) throw Error(ErrorCode::InvalidArgument, "catalogue has no assets");
    for (std::size_t i = 0; i < assets_.size(); ++i) {
      if (assets_[i].empty()) throw Error(ErrorCode::InvalidArgument, "empty asset name");
      for (std::size_t j = 0; j < i; ++j)
        if (assets_[i] == assets_[j]) throw Error(ErrorCode::InvalidArgument, "duplicate asset '" + assets_[i] + "'");
    }
    for (std::size_t i = 0; i < controls_.size(); ++i) {
      auto& entry = controls_[i];
      if (!index_.emplace(entry.id.str(), i).second)
        throw Error(ErrorCode::DuplicateControl, "duplicate control '" + entry.id.str() + "'");
      std::erase_if(entry.effectiveness, [](const auto& kv) { return kv.second.is_none(); });
      for (const auto& [ref, cell] : entry.effectiveness)
        if (!has_asset(ref.asset))
          throw Error(ErrorCode::InvalidArgument,
                      "control '" + entry.id.str() + "' rates unknown asset '" + ref.asset + "'");
    }
    for (const auto& entry : controls_) {
      for (const auto& consequent : entry.dependencies) {
        for (const auto& id : consequent)
          if (!index_.contains(id.str()))
            throw Error(ErrorCode::UnknownControlInDependency,
                        "control '" + entry.id.str() + "' requires unknown control '" + id.str() + "'");
        rules_.emplace_back(entry.id, consequent);
      }
    }
  }

  const std::vector<std::string>& assets() const noexcept { return assets_; }
  const std::vector<ControlEntry>& controls() const noexcept { return controls_; }
  const std::vector<RequirementRule>& rules() const noexcept { return rules_; }

  bool has_asset(std::string_view asset) const {
    return std::find(assets_.begin(), assets_.end(), asset) != assets_.end();
  }

  std::optional<std::size_t> index_of(const ControlId& id) const {
    auto it = index_.find(id.str());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const ControlEntry& at(const ControlId& id) const {
    auto i = index_of(id);
    if (!i) throw Error(ErrorCode::UnknownControl, "unknown control '" + id.str() + "'");
    return controls_[*i];
  }

  /// All (asset, objective) pairs in asset order then C, I, A.
  std::vector<ObjectiveRef> targets() const {
    std::vector<ObjectiveRef> out;
    for (const auto& a : assets_)
      for (auto o : kObjectives) out.push_back({a, o});
    return out;
  }

  /// Uncertain cells in enumeration order: control file order, asset order,
  /// objective order C < I < A.
  std::vector<CellKey> uncertain_cells() const {
    std::vector<CellKey> out;
    for (const auto& entry : controls_)
      for (const auto& a : assets_)
        for (auto o : kObjectives) {
          ObjectiveRef ref{a, o};
          if (const auto* cell = entry.cell(ref); cell && cell->uncertain()) out.push_back({entry.id, ref});
        }
    return out;
  }

  /// Product of option counts over uncertain cells, saturating at UINT64_MAX.
  std::uint64_t case_count() const {
    std::uint64_t n = 1;
    for (const auto& key : uncertain_cells()) {
      auto k = at(key.control).cell(key.target)->options().size();
      n = n > UINT64_MAX / k ? UINT64_MAX : n * k;
    }
    return n;
  }

  friend bool operator==(const ControlCatalogue& a, const ControlCatalogue& b) {
    return a.assets_ == b.assets_ && a.controls_ == b.controls_;
  }

 private:
  std::vector<std::string> assets_;
  std::vector<ControlEntry> controls_;
  std::vector<RequirementRule> rules_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Mandatory atoms composed with opt(optional ids), both in file order.
inline FamilyTerm family_of(const ControlCatalogue& cat) {
  FamilyTerm mandatory = FamilyTerm::one();
  std::vector<ControlId> optional;
  bool first = true;
  for (const auto& entry : cat.controls()) {
    if (entry.mandatory) {
      mandatory = first ? FamilyTerm::atom(entry.id) : compose(mandatory, FamilyTerm::atom(entry.id));
      first = false;
    } else {
      optional.push_back(entry.id);
    }
  }
  if (optional.empty()) return mandatory;
  if (first) return opt(optional);
  return compose(mandatory, opt(optional));
}

/// Cartesian product of uncertain options, first cell varying slowest.
inline std::vector<Case> enumerate_cases(const ControlCatalogue& cat, std::uint64_t limit = kDefaultCaseLimit) {
  auto cells = cat.uncertain_cells();
  auto total = cat.case_count();
  if (total > limit)
    throw Error(ErrorCode::CaseLimitExceeded, std::to_string(total) + " uncertainty cases exceed the case limit of " +
                                                  std::to_string(limit));
  std::vector<const std::vector<Rating>*> options;
  for (const auto& key : cells) options.push_back(&cat.at(key.control).cell(key.target)->options());

  std::vector<Case> out;
  out.reserve(static_cast<std::size_t>(total));
  std::vector<std::size_t> digit(cells.size(), 0);
  for (std::uint64_t n = 0; n < total; ++n) {
    Case c;
    for (std::size_t i = 0; i < cells.size(); ++i) c.assignment.emplace(cells[i], (*options[i])[digit[i]]);
    out.push_back(std::move(c));
    for (std::size_t i = cells.size(); i-- > 0;) {
      if (++digit[i] < options[i]->size()) break;
      digit[i] = 0;
    }
  }
  return out;
}

/// The rating a control has on a target under `c`. Throws
/// UnresolvedUncertainCell when the cell is uncertain and `c` leaves it open.
inline Rating resolve_rating(const ControlEntry& entry, const ObjectiveRef& target, const Case& c) {
  const auto* cell = entry.cell(target);
  if (!cell) return Rating::None;
  if (!cell->uncertain()) return cell->options().front();
  auto it = c.assignment.find(CellKey{entry.id, target});
  if (it == c.assignment.end())
    throw Error(ErrorCode::UnresolvedUncertainCell,
                "case does not resolve the rating of '" + entry.id.str() + "' on " + target.label());
  return it->second;
}

}  // namespace ctrlgame
