#pragma once

// Control families as terms of a commutative idempotent semiring.
//
//   choice (+)       union of the combination sets
//   composition (*)  pairwise union of atom sets
//   Zero             no combination at all
//   One              the single empty combination
//
// Idempotence and commutativity make a set of atom-sets a canonical normal
// form, so every algebraic law is decided by set equality on NormalFamily.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ctrlgame/error.hpp"

namespace ctrlgame {

/// Natural order on identifiers: digit runs compare numerically, so
/// "AC-2" < "AC-12" < "AU-1". Ties (e.g. "AC-02" vs "AC-2") fall back to
/// plain byte order so the order stays total.
inline std::strong_ordering natural_compare(std::string_view a, std::string_view b) {
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (is_digit(a[i]) && is_digit(b[j])) {
      std::size_t i0 = i, j0 = j;
      while (i < a.size() && is_digit(a[i])) ++i;
      while (j < b.size() && is_digit(b[j])) ++j;
      auto da = a.substr(i0, i - i0), db = b.substr(j0, j - j0);
      while (da.size() > 1 && da.front() == '0') da.remove_prefix(1);
      while (db.size() > 1 && db.front() == '0') db.remove_prefix(1);
      if (da.size() != db.size()) return da.size() <=> db.size();
      if (auto c = da.compare(db); c != 0) return c <=> 0;
    } else {
      if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) <=> static_cast<unsigned char>(b[j]);
      ++i;
      ++j;
    }
  }
  if (auto c = (a.size() - i) <=> (b.size() - j); c != 0) return c;
  return a.compare(b) <=> 0;
}

class ControlId {
 public:
  ControlId() = default;

  /// Throws InvalidArgument on an empty token or one containing whitespace,
  /// `,`, `;`, `+` or `|` (all reserved by the file formats).
  explicit ControlId(std::string value) : value_(std::move(value)) {
    if (auto why = invalid_reason(value_); !why.empty())
      throw Error(ErrorCode::InvalidArgument, "invalid control id '" + value_ + "': " + why);
  }

  static std::string invalid_reason(std::string_view v) {
    if (v.empty()) return "empty";
    for (char c : v) {
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return "contains whitespace";
      if (c == ',' || c == ';' || c == '+' || c == '|') return std::string("contains reserved character '") + c + "'";
    }
    return {};
  }

  const std::string& str() const noexcept { return value_; }

  friend bool operator==(const ControlId&, const ControlId&) = default;
  friend std::strong_ordering operator<=>(const ControlId& a, const ControlId& b) {
    return natural_compare(a.value_, b.value_);
  }

 private:
  std::string value_;
};

/// A proper security control combination. The empty set is the element One.
using Combination = std::set<ControlId>;

inline Combination make_combination(std::initializer_list<std::string_view> ids) {
  Combination c;
  for (auto id : ids) c.insert(ControlId(std::string(id)));
  return c;
}

/// Sum-of-products form: a set of combinations. Empty means Zero.
struct NormalFamily {
  std::set<Combination> combos;

  std::size_t size() const noexcept { return combos.size(); }
  bool empty() const noexcept { return combos.empty(); }
  friend bool operator==(const NormalFamily&, const NormalFamily&) = default;
};

class FamilyTerm {
 public:
  struct Zero {};
  struct One {};
  struct Atom {
    ControlId id;
  };
  struct Choice {
    std::shared_ptr<const FamilyTerm> lhs, rhs;
  };
  struct Composition {
    std::shared_ptr<const FamilyTerm> lhs, rhs;
  };
  using Node = std::variant<Zero, One, Atom, Choice, Composition>;

  FamilyTerm() : node_(std::make_shared<const Node>(Zero{})) {}

  static FamilyTerm zero() { return FamilyTerm(Zero{}); }
  static FamilyTerm one() { return FamilyTerm(One{}); }
  static FamilyTerm atom(ControlId id) { return FamilyTerm(Atom{std::move(id)}); }
  static FamilyTerm atom(std::string id) { return atom(ControlId(std::move(id))); }

  const Node& node() const noexcept { return *node_; }

 private:
  explicit FamilyTerm(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  friend FamilyTerm choice(FamilyTerm, FamilyTerm);
  friend FamilyTerm compose(FamilyTerm, FamilyTerm);

  std::shared_ptr<const Node> node_;
};

inline FamilyTerm choice(FamilyTerm a, FamilyTerm b) {
  return FamilyTerm(FamilyTerm::Choice{std::make_shared<const FamilyTerm>(std::move(a)), std::make_shared<const FamilyTerm>(std::move(b))});
}

inline FamilyTerm compose(FamilyTerm a, FamilyTerm b) {
  return FamilyTerm(FamilyTerm::Composition{std::make_shared<const FamilyTerm>(std::move(a)), std::make_shared<const FamilyTerm>(std::move(b))});
}

/// (c1 + 1) * ... * (cn + 1); opt([]) is One.
inline FamilyTerm opt(const std::vector<ControlId>& ids) {
  std::set<ControlId> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second)
      throw Error(ErrorCode::DuplicateControl, "duplicate control '" + id.str() + "' in optional list");
  FamilyTerm out = FamilyTerm::one();
  bool first = true;
  for (const auto& id : ids) {
    auto factor = choice(FamilyTerm::atom(id), FamilyTerm::one());
    out = first ? factor : compose(std::move(out), std::move(factor));
    first = false;
  }
  return out;
}

/// Upper bound on the number of combinations `t` normalizes to, saturating at
/// UINT64_MAX. Exact for terms without overlapping alternatives (e.g. opt).
inline std::uint64_t estimated_size(const FamilyTerm& t) {
  constexpr std::uint64_t kMax = UINT64_MAX;
  struct Visitor {
    std::uint64_t operator()(const FamilyTerm::Zero&) const { return 0; }
    std::uint64_t operator()(const FamilyTerm::One&) const { return 1; }
    std::uint64_t operator()(const FamilyTerm::Atom&) const { return 1; }
    std::uint64_t operator()(const FamilyTerm::Choice& c) const {
      auto a = estimated_size(*c.lhs), b = estimated_size(*c.rhs);
      return a > kMax - b ? kMax : a + b;
    }
    std::uint64_t operator()(const FamilyTerm::Composition& c) const {
      auto a = estimated_size(*c.lhs), b = estimated_size(*c.rhs);
      if (a == 0 || b == 0) return 0;
      return a > kMax / b ? kMax : a * b;
    }
  };
  return std::visit(Visitor{}, t.node());
}

inline constexpr std::uint64_t kDefaultExpansionLimit = std::uint64_t{1} << 20;

inline NormalFamily family_union(const NormalFamily& a, const NormalFamily& b) {
  NormalFamily out = a;
  out.combos.insert(b.combos.begin(), b.combos.end());
  return out;
}

inline NormalFamily family_product(const NormalFamily& a, const NormalFamily& b) {
  NormalFamily out;
  for (const auto& x : a.combos)
    for (const auto& y : b.combos) {
      Combination merged = x;
      merged.insert(y.begin(), y.end());
      out.combos.insert(std::move(merged));
    }
  return out;
}

/// Expands a term into sum-of-products form. Throws ExpansionLimitExceeded
/// when the estimated size is above `limit`; such families are only
/// searchable implicitly (see solver.hpp).
inline NormalFamily normalize(const FamilyTerm& t, std::uint64_t limit = kDefaultExpansionLimit) {
  if (auto n = estimated_size(t); n > limit)
    throw Error(ErrorCode::ExpansionLimitExceeded,
                "family has an estimated " + std::to_string(n) + " combinations, above the expansion limit of " +
                    std::to_string(limit) + "; use the implicit solver instead");
  struct Visitor {
    NormalFamily operator()(const FamilyTerm::Zero&) const { return {}; }
    NormalFamily operator()(const FamilyTerm::One&) const { return NormalFamily{{Combination{}}}; }
    NormalFamily operator()(const FamilyTerm::Atom& a) const { return NormalFamily{{Combination{a.id}}}; }
    NormalFamily operator()(const FamilyTerm::Choice& c) const {
      return family_union(normalize(*c.lhs, UINT64_MAX), normalize(*c.rhs, UINT64_MAX));
    }
    NormalFamily operator()(const FamilyTerm::Composition& c) const {
      // Zero annihilates; skip expanding the other side.
      if (estimated_size(*c.lhs) == 0 || estimated_size(*c.rhs) == 0) return {};
      return family_product(normalize(*c.lhs, UINT64_MAX), normalize(*c.rhs, UINT64_MAX));
    }
  };
  return std::visit(Visitor{}, t.node());
}

/// Natural semiring order: a <= b iff a + b = b.
inline bool leq(const NormalFamily& a, const NormalFamily& b) {
  return std::includes(b.combos.begin(), b.combos.end(), a.combos.begin(), a.combos.end());
}

/// c1 refines c2 iff c1 = c2 * c3 for some c3, i.e. atoms(c1) contains atoms(c2).
inline bool refines(const Combination& c1, const Combination& c2) {
  return std::includes(c1.begin(), c1.end(), c2.begin(), c2.end());
}

/// `antecedent` requires the composition of `consequent` within a family.
struct RequirementRule {
  ControlId antecedent;
  Combination consequent;

  RequirementRule() = default;
  RequirementRule(ControlId a, Combination c) : antecedent(std::move(a)), consequent(std::move(c)) {
    if (consequent.empty())
      throw Error(ErrorCode::InvalidArgument, "requirement of '" + antecedent.str() + "' has no consequent");
    if (consequent.contains(antecedent))
      throw Error(ErrorCode::InvalidArgument, "control '" + antecedent.str() + "' requires itself");
  }

  friend bool operator==(const RequirementRule&, const RequirementRule&) = default;
};

/// For every rule: antecedent in c implies consequent contained in c.
template <typename Rules>
bool satisfies_requirements(const Combination& c, const Rules& rules) {
  for (const RequirementRule& rule : rules)
    if (c.contains(rule.antecedent) && !refines(c, rule.consequent)) return false;
  return true;
}

/// Keeps the combinations of `family` that satisfy every rule; this is the
/// choice case of the requirement relation applied combination by combination.
template <typename Rules>
NormalFamily filter_by_requirements(const NormalFamily& family, const Rules& rules) {
  NormalFamily out;
  for (const auto& c : family.combos)
    if (satisfies_requirements(c, rules)) out.combos.insert(out.combos.end(), c);
  return out;
}

}  // namespace ctrlgame
