#pragma once

// Plays the game for one uncertainty case: among all combinations that hold
// every mandatory control, satisfy every requirement rule and fit the budget,
// return all of those that lexicographically maximize the per-tier total
// effectiveness, keeping only the cheapest.
//
// solve_case runs an exact branch-and-bound over the optional controls and
// never materializes the 2^n family. brute_force_solve_case is the reference
// oracle: it enumerates every subset with the Rational valuation path.
//
// Scores inside the search are scaled fixed-point integers. With N the
// largest number of controls rating any single profiled target above None,
// 10^N * prod(1 - e_i) is an integer for every reachable combination, so all
// comparisons are exact integer comparisons.

#include <boost/dynamic_bitset.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "ctrlgame/algebra.hpp"
#include "ctrlgame/catalogue.hpp"
#include "ctrlgame/numeric.hpp"
#include "ctrlgame/profile.hpp"
#include "ctrlgame/valuation.hpp"

namespace ctrlgame {

/// Sum of eff over the tier's targets.
inline Rational tier_score(const Combination& c, const AttackerTier& tier, const Case& case_,
                           const ControlCatalogue& cat) {
  Rational total = 0;
  for (const auto& t : tier.targets) total += eff(c, t, case_, cat);
  return total;
}

/// Result for one case. `feasible == false` is the NoFeasibleCombination
/// marker: even the mandatory controls with their requirements exceed the
/// budget.
struct CaseSolution {
  Case case_;
  bool feasible = false;
  std::vector<Combination> combos;  // sorted
  std::vector<Rational> tier_scores;
  Money cost;

  /// Equality of results, ignoring which case produced them.
  bool same_result(const CaseSolution& o) const {
    return feasible == o.feasible && combos == o.combos && tier_scores == o.tier_scores && cost == o.cost;
  }
};

struct SolverStats {
  std::uint64_t nodes = 0;
  /// Zero-cost controls rating None on every profiled target that no rule
  /// requires; they cannot change any score and are left out of results.
  std::uint64_t inert_controls_excluded = 0;
  double wall_seconds = 0;
};

struct SolveOutcome {
  std::vector<CaseSolution> cases;
  SolverStats stats;
};

/// Optional, free, rated None on every profiled target under `case_`, and not
/// the consequent of any rule. Adding such a control never changes scores or
/// cost, so combinations containing one are canonicalized away.
inline bool is_inert(const ControlEntry& entry, const AttackerProfile& profile, const Case& case_,
                     const ControlCatalogue& cat) {
  if (entry.mandatory || entry.cost.cents() != 0) return false;
  for (const auto& rule : cat.rules())
    if (rule.consequent.contains(entry.id)) return false;
  for (const auto& tier : profile.tiers)
    for (const auto& t : tier.targets)
      if (resolve_rating(entry, t, case_) != Rating::None) return false;
  return true;
}

namespace detail {

using Int256 = boost::multiprecision::int256_t;

inline BigInt to_bigint(const BigInt& v) { return v; }
inline BigInt to_bigint(const Int256& v) { return BigInt(v); }
inline BigInt to_bigint(__int128 v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  BigInt out = static_cast<std::uint64_t>(u >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(u);
  return neg ? BigInt(-out) : out;
}

/// Case-specific tables shared by every Int width.
struct Instance {
  std::size_t n = 0;                           // all catalogue controls
  std::vector<ObjectiveRef> targets;           // distinct profiled targets
  std::vector<std::vector<std::size_t>> tier_targets;
  std::vector<std::vector<int>> complement;    // [control][target] tenths
  std::vector<std::int64_t> cost;              // cents
  std::vector<std::vector<std::size_t>> closure;  // includes the control itself
  std::vector<bool> relevant;                  // rates some profiled target
  boost::dynamic_bitset<> base;                // mandatory closure
  std::int64_t base_cost = 0;
  std::int64_t budget = 0;
  std::int64_t cost_unit = 1;                  // cents per cost unit; cost and budget are divided by it
  std::vector<std::size_t> candidates;         // optional decision controls
  std::uint64_t inert = 0;
  int scale_digits = 0;

  Instance(const ControlCatalogue& cat, const Budget& b, const AttackerProfile& profile, const Case& case_) {
    const auto& controls = cat.controls();
    n = controls.size();
    budget = b.limit.cents();
    for (const auto& tier : profile.tiers) {
      std::vector<std::size_t> ids;
      for (const auto& t : tier.targets) {
        auto it = std::find(targets.begin(), targets.end(), t);
        if (it == targets.end()) {
          targets.push_back(t);
          it = targets.end() - 1;
        }
        ids.push_back(static_cast<std::size_t>(it - targets.begin()));
      }
      tier_targets.push_back(std::move(ids));
    }
    complement.assign(n, std::vector<int>(targets.size(), 10));
    relevant.assign(n, false);
    cost.resize(n);
    std::vector<int> rated(targets.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      cost[i] = controls[i].cost.cents();
      for (std::size_t u = 0; u < targets.size(); ++u) {
        complement[i][u] = complement_tenths(resolve_rating(controls[i], targets[u], case_));
        if (complement[i][u] < 10) {
          relevant[i] = true;
          ++rated[u];
        }
      }
    }
    for (int r : rated) scale_digits = std::max(scale_digits, r);
    std::int64_t g = 0;
    for (auto c : cost) g = std::gcd(g, c);
    if (g > 1) {
      cost_unit = g;
      for (auto& c : cost) c /= g;
      budget = budget >= 0 ? budget / g : -((-budget + g - 1) / g);
    }

    // Transitive requirement closure by fixpoint.
    std::vector<std::vector<std::size_t>> direct(n);
    std::vector<bool> is_consequent(n, false);
    for (const auto& rule : cat.rules()) {
      auto a = *cat.index_of(rule.antecedent);
      for (const auto& id : rule.consequent) {
        auto c = *cat.index_of(id);
        direct[a].push_back(c);
        is_consequent[c] = true;
      }
    }
    closure.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<bool> seen(n, false);
      std::vector<std::size_t> stack{i};
      seen[i] = true;
      while (!stack.empty()) {
        auto x = stack.back();
        stack.pop_back();
        closure[i].push_back(x);
        for (auto y : direct[x])
          if (!seen[y]) {
            seen[y] = true;
            stack.push_back(y);
          }
      }
      std::sort(closure[i].begin(), closure[i].end());
    }

    base.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      if (controls[i].mandatory)
        for (auto x : closure[i]) base.set(x);
    for (std::size_t i = 0; i < n; ++i)
      if (base.test(i)) base_cost += cost[i];

    for (std::size_t i = 0; i < n; ++i) {
      if (base.test(i)) continue;
      if (!relevant[i] && !is_consequent[i]) {
        // Free ones are inert; priced ones only ever raise cost.
        if (cost[i] == 0) ++inert;
        continue;
      }
      std::int64_t extra = 0;
      for (auto x : closure[i])
        if (!base.test(x)) extra += cost[x];
      if (base_cost + extra > budget) continue;
      candidates.push_back(i);
    }
  }

  bool feasible() const { return base_cost <= budget; }
};

template <typename Int>
class Search {
 public:
  explicit Search(const Instance& inst) : inst_(inst) {
    scale_ = 1;
    for (int i = 0; i < inst_.scale_digits; ++i) scale_ *= 10;
    const auto nt = inst_.targets.size();
    miss_.assign(nt, scale_);
    included_ = inst_.base;
    excluded_.resize(inst_.n);
    cost_ = inst_.base_cost;
    for (std::size_t i = 0; i < inst_.n; ++i)
      if (included_.test(i)) apply(i);
    order_decisions();
  }

  struct Incumbent {
    std::vector<Int> scores;
    std::int64_t cost = 0;
    std::vector<boost::dynamic_bitset<>> sets;
  };

  void run() { search(0); }

  const std::optional<Incumbent>& incumbent() const { return best_; }
  std::uint64_t nodes() const { return nodes_; }
  const Int& scale() const { return scale_; }

  /// Optimistic per-tier bounds for the node that fixes `in` included and
  /// `out` excluded on top of the mandatory closure. Returns nullopt when
  /// the node itself is infeasible. Exposed for pruning-safety tests.
  std::optional<std::vector<Int>> bounds_at(const std::vector<std::size_t>& in, const std::vector<std::size_t>& out) {
    for (auto x : out) {
      if (included_.test(x)) return std::nullopt;
      excluded_.set(x);
    }
    for (auto x : in) {
      if (!can_include(x)) return std::nullopt;
      include(x);
    }
    std::vector<Int> bounds;
    auto avail = available(0);
    for (std::size_t j = 0; j < inst_.tier_targets.size(); ++j) bounds.push_back(tier_bound(j, avail));
    return bounds;
  }

  std::vector<Int> scores() const {
    std::vector<Int> out;
    for (const auto& tier : inst_.tier_targets) {
      Int s = 0;
      for (auto u : tier) s += scale_ - miss_[u];
      out.push_back(s);
    }
    return out;
  }

 private:
  struct Undo {
    std::vector<std::size_t> added;
    std::vector<Int> miss;
    std::int64_t cost;
  };

  void apply(std::size_t i) {
    for (std::size_t u = 0; u < miss_.size(); ++u) {
      int q = inst_.complement[i][u];
      if (q < 10) miss_[u] = miss_[u] * q / 10;
    }
  }

  bool can_include(std::size_t i) const {
    std::int64_t extra = 0;
    for (auto x : inst_.closure[i]) {
      if (excluded_.test(x)) return false;
      if (!included_.test(x)) extra += inst_.cost[x];
    }
    return cost_ + extra <= inst_.budget;
  }

  void include(std::size_t i) {
    for (auto x : inst_.closure[i])
      if (!included_.test(x)) {
        included_.set(x);
        cost_ += inst_.cost[x];
        apply(x);
      }
  }

  Int gain(std::size_t i, std::size_t tier) const {
    Int g = 0;
    for (auto u : inst_.tier_targets[tier]) {
      int q = inst_.complement[i][u];
      if (q < 10) g += miss_[u] * (10 - q) / 10;
    }
    return g;
  }

  // Decision controls that can still be added below position `pos`.
  std::vector<std::size_t> available(std::size_t pos) const {
    std::vector<std::size_t> out;
    for (std::size_t k = pos; k < order_.size(); ++k) {
      auto i = order_[k];
      if (!included_.test(i) && !excluded_.test(i) && can_include(i)) out.push_back(i);
    }
    return out;
  }

  // Optimistic score for `tier` over every affordable extension by `avail`.
  //
  // Per target u, the gain of adding a set S is at most
  //   min(cap_u, sum_{i in S} g_iu)
  // where g_iu is i's marginal gain now (submodularity) and cap_u the gain of
  // adding all of `avail`. For any set M of targets, replacing the min by
  // cap_u on M and by the sum elsewhere leaves a fractional knapsack, whose
  // LP optimum is a valid bound. We start with M empty and move targets whose
  // knapsack gain overshoots their cap into M, keeping the smallest bound.
  // Refinement stops once the bound drops below `stop_below`.
  Int tier_bound(std::size_t tier, const std::vector<std::size_t>& avail, const Int* stop_below = nullptr) const {
    const auto& targets = inst_.tier_targets[tier];
    const auto nt = targets.size();
    Int current = 0;
    for (auto u : targets) current += scale_ - miss_[u];

    auto& cap = scratch_.cap;
    auto& reached = scratch_.reached;
    auto& gains = scratch_.gains;
    auto& owner = scratch_.owner;
    auto& capped = scratch_.capped;
    cap.resize(nt);
    reached.resize(nt);
    capped.assign(nt, 0);
    for (std::size_t k = 0; k < nt; ++k) {
      Int rest = miss_[targets[k]];
      for (auto i : avail) {
        int q = inst_.complement[i][targets[k]];
        if (q < 10) rest = rest * q / 10;
      }
      cap[k] = miss_[targets[k]] - rest;
    }
    owner.clear();
    gains.resize(avail.size() * nt);
    for (auto i : avail) {
      Int* row = gains.data() + owner.size() * nt;
      bool any = false;
      for (std::size_t k = 0; k < nt; ++k) {
        int q = inst_.complement[i][targets[k]];
        if (q < 10) {
          row[k] = miss_[targets[k]] * (10 - q) / 10;
          any = true;
        } else {
          row[k] = 0;
        }
      }
      if (any) owner.push_back(i);
    }
    if (owner.empty()) return current;

    auto& entries = scratch_.entries;
    auto knapsack = [&]() -> Int {
      Int bound = current;
      for (std::size_t k = 0; k < nt; ++k) {
        reached[k] = 0;
        if (capped[k]) bound += cap[k];
      }
      entries.clear();
      for (std::size_t m = 0; m < owner.size(); ++m) {
        const Int* row = gains.data() + m * nt;
        Int v = 0;
        for (std::size_t k = 0; k < nt; ++k)
          if (!capped[k]) v += row[k];
        if (v == 0) continue;
        auto c = inst_.cost[owner[m]];
        if (c == 0) {
          bound += v;
          for (std::size_t k = 0; k < nt; ++k) reached[k] += row[k];
        } else {
          entries.push_back({std::move(v), c, m});
        }
      }
      std::sort(entries.begin(), entries.end(),
                [](const Entry& a, const Entry& b) { return a.value * b.cost > b.value * a.cost; });
      std::int64_t room = inst_.budget - cost_;
      for (const auto& e : entries) {
        const Int* row = gains.data() + e.item * nt;
        if (e.cost <= room) {
          bound += e.value;
          room -= e.cost;
          for (std::size_t k = 0; k < nt; ++k) reached[k] += row[k];
        } else {
          if (room > 0) {
            bound += (e.value * room + (e.cost - 1)) / e.cost;
            for (std::size_t k = 0; k < nt; ++k) reached[k] += row[k] * room / e.cost;
          }
          break;
        }
      }
      return bound;
    };

    Int best = knapsack();
    for (int round = 0; round < 3; ++round) {
      if (stop_below && best < *stop_below) break;
      bool changed = false;
      for (std::size_t k = 0; k < nt; ++k)
        if (!capped[k] && reached[k] > cap[k]) {
          capped[k] = 1;
          changed = true;
        }
      if (!changed) break;
      Int b = knapsack();
      if (b < best) best = std::move(b);
    }
    return best;
  }

  void order_decisions() {
    struct Key {
      std::size_t control;
      std::vector<Int> gains;
    };
    std::vector<Key> keys;
    for (auto i : inst_.candidates) {
      Key k{i, {}};
      for (std::size_t j = 0; j < inst_.tier_targets.size(); ++j) k.gains.push_back(gain(i, j));
      keys.push_back(std::move(k));
    }
    // Descending gain/cost per tier, free controls first; then file order.
    std::stable_sort(keys.begin(), keys.end(), [&](const Key& a, const Key& b) {
      auto ca = inst_.cost[a.control], cb = inst_.cost[b.control];
      for (std::size_t j = 0; j < a.gains.size(); ++j) {
        bool fa = ca == 0 && a.gains[j] > 0, fb = cb == 0 && b.gains[j] > 0;
        if (fa != fb) return fa;
        Int lhs = a.gains[j] * (cb == 0 ? 1 : cb), rhs = b.gains[j] * (ca == 0 ? 1 : ca);
        if (lhs != rhs) return lhs > rhs;
      }
      return false;
    });
    for (const auto& k : keys) order_.push_back(k.control);
  }

  // -1 worse, 0 equal, 1 better than the incumbent.
  int compare(const std::vector<Int>& s, std::int64_t c) const {
    const auto& inc = *best_;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] < inc.scores[j]) return -1;
      if (s[j] > inc.scores[j]) return 1;
    }
    if (c > inc.cost) return -1;
    if (c < inc.cost) return 1;
    return 0;
  }

  void record_leaf() {
    auto s = scores();
    if (!best_) {
      best_ = Incumbent{std::move(s), cost_, {included_}};
      return;
    }
    int cmp = compare(s, cost_);
    if (cmp > 0) best_ = Incumbent{std::move(s), cost_, {included_}};
    else if (cmp == 0) best_->sets.push_back(included_);
  }

  bool prune(const std::vector<std::size_t>& avail) const {
    if (!best_) return false;
    for (std::size_t j = 0; j < inst_.tier_targets.size(); ++j) {
      Int ub = tier_bound(j, avail, &best_->scores[j]);
      if (ub < best_->scores[j]) return true;
      if (ub > best_->scores[j]) return false;
    }
    return cost_ > best_->cost;
  }

  void search(std::size_t pos) {
    ++nodes_;
    auto avail = available(pos);
    bool only_dominated = std::all_of(avail.begin(), avail.end(), [&](std::size_t i) {
      return !inst_.relevant[i] && inst_.cost[i] > 0;
    });
    if (avail.empty() || only_dominated) {
      record_leaf();
      return;
    }
    if (prune(avail)) return;

    auto next = avail.front();
    std::size_t k = pos;
    while (order_[k] != next) ++k;

    Undo undo{{}, miss_, cost_};
    for (auto x : inst_.closure[next])
      if (!included_.test(x)) undo.added.push_back(x);
    include(next);
    search(k + 1);
    miss_ = std::move(undo.miss);
    cost_ = undo.cost;
    for (auto x : undo.added) included_.reset(x);

    excluded_.set(next);
    search(k + 1);
    excluded_.reset(next);
  }

  const Instance& inst_;
  Int scale_;
  std::vector<Int> miss_;  // 10^N * prod(1 - e) per target
  boost::dynamic_bitset<> included_, excluded_;
  std::int64_t cost_ = 0;
  std::vector<std::size_t> order_;
  std::optional<Incumbent> best_;
  std::uint64_t nodes_ = 0;

  struct Entry {
    Int value;
    std::int64_t cost;
    std::size_t item;
  };
  struct Scratch {
    std::vector<Int> cap, reached, gains;
    std::vector<std::size_t> owner;
    std::vector<char> capped;
    std::vector<Entry> entries;
  };
  mutable Scratch scratch_;
};

/// Bits needed for the largest intermediate: targets * 10^N * total cost.
inline int required_bits(const Instance& inst) {
  std::int64_t total_cost = 1;
  for (auto c : inst.cost) total_cost += c;
  double bits = inst.scale_digits * std::log2(10.0) + std::log2(static_cast<double>(inst.targets.size() + 1)) +
                std::log2(static_cast<double>(total_cost) + 1) + 4;
  return static_cast<int>(std::ceil(bits));
}

template <typename Int>
CaseSolution finish(const Instance& inst, Search<Int>& search, const ControlCatalogue& cat, const Case& case_) {
  CaseSolution sol;
  sol.case_ = case_;
  const auto& best = search.incumbent();
  sol.feasible = true;
  BigInt scale = to_bigint(search.scale());
  for (const auto& s : best->scores) sol.tier_scores.emplace_back(to_bigint(s), scale);
  sol.cost = Money::from_cents(best->cost * inst.cost_unit);
  for (const auto& set : best->sets) {
    Combination c;
    for (std::size_t i = 0; i < inst.n; ++i)
      if (set.test(i)) c.insert(cat.controls()[i].id);
    sol.combos.push_back(std::move(c));
  }
  std::sort(sol.combos.begin(), sol.combos.end());
  return sol;
}

template <typename Int>
CaseSolution run_search(const Instance& inst, const ControlCatalogue& cat, const Case& case_, SolverStats* stats) {
  Search<Int> search(inst);
  search.run();
  if (stats) stats->nodes += search.nodes();
  return finish(inst, search, cat, case_);
}

}  // namespace detail

/// Exact branch-and-bound. Throws NoFeasibleCombination when the mandatory
/// controls and their requirements alone exceed the budget.
inline CaseSolution solve_case(const ControlCatalogue& cat, const Budget& budget, const AttackerProfile& profile,
                               const Case& case_, SolverStats* stats = nullptr) {
  validate_profile(profile, cat);
  detail::Instance inst(cat, budget, profile, case_);
  if (!inst.feasible())
    throw Error(ErrorCode::NoFeasibleCombination,
                "mandatory controls and their requirements cost " + Money::from_cents(inst.base_cost * inst.cost_unit).to_string() +
                    ", above the budget of " + budget.limit.to_string());
  if (stats) stats->inert_controls_excluded += inst.inert;
  int bits = detail::required_bits(inst);
  if (bits <= 126) return detail::run_search<__int128>(inst, cat, case_, stats);
  if (bits <= 254) return detail::run_search<detail::Int256>(inst, cat, case_, stats);
  return detail::run_search<BigInt>(inst, cat, case_, stats);
}

inline constexpr std::size_t kOracleMaxOptional = 20;

/// Reference oracle: enumerates every subset of the optional controls,
/// filters by requirements and budget with the algebra/valuation functions,
/// and scans lexicographically with Rational scores.
inline CaseSolution brute_force_solve_case(const ControlCatalogue& cat, const Budget& budget,
                                           const AttackerProfile& profile, const Case& case_) {
  validate_profile(profile, cat);
  Combination mandatory;
  std::vector<ControlId> optional;
  for (const auto& e : cat.controls()) {
    if (e.mandatory) mandatory.insert(e.id);
    else if (!is_inert(e, profile, case_, cat)) optional.push_back(e.id);
  }
  std::size_t n_optional = 0;
  for (const auto& e : cat.controls()) n_optional += e.mandatory ? 0 : 1;
  if (n_optional > kOracleMaxOptional)
    throw Error(ErrorCode::TooLargeForOracle,
                std::to_string(n_optional) + " optional controls exceed the oracle limit of " +
                    std::to_string(kOracleMaxOptional));

  CaseSolution sol;
  sol.case_ = case_;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << optional.size()); ++mask) {
    Combination combo = mandatory;
    for (std::size_t k = 0; k < optional.size(); ++k)
      if (mask >> k & 1) combo.insert(optional[k]);
    if (!satisfies_requirements(combo, cat.rules())) continue;
    auto c = cost(combo, cat);
    if (c > budget.limit) continue;
    std::vector<Rational> scores;
    for (const auto& tier : profile.tiers) scores.push_back(tier_score(combo, tier, case_, cat));
    if (!sol.feasible) {
      sol = CaseSolution{case_, true, {combo}, std::move(scores), c};
      continue;
    }
    int cmp = 0;
    for (std::size_t j = 0; j < scores.size() && cmp == 0; ++j)
      cmp = scores[j] > sol.tier_scores[j] ? 1 : scores[j] < sol.tier_scores[j] ? -1 : 0;
    if (cmp == 0) cmp = c < sol.cost ? 1 : c > sol.cost ? -1 : 0;
    if (cmp > 0) sol = CaseSolution{case_, true, {combo}, std::move(scores), c};
    else if (cmp == 0) sol.combos.push_back(combo);
  }
  if (!sol.feasible)
    throw Error(ErrorCode::NoFeasibleCombination, "no combination with the mandatory controls fits the budget");
  std::sort(sol.combos.begin(), sol.combos.end());
  return sol;
}

struct SolveOptions {
  unsigned threads = 1;
  std::uint64_t case_limit = kDefaultCaseLimit;
  /// Called after each case finishes with (completed, total); may be called
  /// from worker threads.
  std::function<void(std::size_t, std::size_t)> on_case_done;
};

/// solve_case over every enumerated case, in case order. Cases run on up to
/// `threads` workers; the outcome does not depend on the thread count.
inline SolveOutcome solve(const ControlCatalogue& cat, const Budget& budget, const AttackerProfile& profile,
                          const SolveOptions& options = {}) {
  validate_profile(profile, cat);
  auto started = std::chrono::steady_clock::now();
  auto cases = enumerate_cases(cat, options.case_limit);
  SolveOutcome outcome;
  outcome.cases.resize(cases.size());
  std::vector<SolverStats> stats(cases.size());
  std::vector<std::exception_ptr> errors(cases.size());
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex callback_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      try {
        outcome.cases[i] = solve_case(cat, budget, profile, cases[i], &stats[i]);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NoFeasibleCombination) {
          outcome.cases[i] = CaseSolution{cases[i], false, {}, {}, {}};
        } else {
          errors[i] = std::current_exception();
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
      auto completed = ++done;
      if (options.on_case_done) {
        std::lock_guard lock(callback_mutex);
        options.on_case_done(completed, cases.size());
      }
    }
  };
  unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(cases.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& s : stats) {
    outcome.stats.nodes += s.nodes;
    outcome.stats.inert_controls_excluded += s.inert_controls_excluded;
  }
  outcome.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return outcome;
}

}  // namespace ctrlgame
