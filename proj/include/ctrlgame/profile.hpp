#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "ctrlgame/catalogue.hpp"
#include "ctrlgame/error.hpp"

namespace ctrlgame {

/// Targets an attacker is equally expected to pursue.
struct AttackerTier {
  std::vector<ObjectiveRef> targets;

  friend bool operator==(const AttackerTier&, const AttackerTier&) = default;
};

/// Tiers in priority order. A target may appear in more than one tier.
struct AttackerProfile {
  std::vector<AttackerTier> tiers;

  friend bool operator==(const AttackerProfile&, const AttackerProfile&) = default;
};

/// Throws InvalidArgument unless every tier is non-empty, free of duplicates
/// and refers to catalogue assets only.
inline void validate_profile(const AttackerProfile& profile, const ControlCatalogue& cat) {
  if (profile.tiers.empty()) throw Error(ErrorCode::InvalidArgument, "attacker profile has no tiers");
  for (std::size_t i = 0; i < profile.tiers.size(); ++i) {
    const auto& tier = profile.tiers[i];
    auto where = "tier " + std::to_string(i + 1);
    if (tier.targets.empty()) throw Error(ErrorCode::InvalidArgument, where + " has no targets");
    for (std::size_t k = 0; k < tier.targets.size(); ++k) {
      if (!cat.has_asset(tier.targets[k].asset))
        throw Error(ErrorCode::InvalidArgument, where + " targets unknown asset '" + tier.targets[k].asset + "'");
      for (std::size_t m = 0; m < k; ++m)
        if (tier.targets[m] == tier.targets[k])
          throw Error(ErrorCode::InvalidArgument, where + " lists " + tier.targets[k].label() + " twice");
    }
  }
}

inline nlohmann::json profile_to_json(const AttackerProfile& profile) {
  nlohmann::json tiers = nlohmann::json::array();
  for (const auto& tier : profile.tiers) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& ref : tier.targets)
      t.push_back({{"asset", ref.asset}, {"objective", std::string(1, to_char(ref.objective))}});
    tiers.push_back(std::move(t));
  }
  return {{"tiers", std::move(tiers)}};
}

/// `{"tiers": [[{"asset": "...", "objective": "C"}, ...], ...]}`. Shape
/// errors throw ParseError; semantic checks are left to validate_profile.
inline AttackerProfile profile_from_json(const nlohmann::json& doc) {
  auto require = [](bool ok, const std::string& path, const std::string& why) {
    if (!ok) throw ParseError(0, path, why);
  };
  require(doc.is_object() && doc.contains("tiers") && doc["tiers"].is_array(), "$.tiers", "expected an array of tiers");
  AttackerProfile profile;
  for (std::size_t i = 0; i < doc["tiers"].size(); ++i) {
    const auto& t = doc["tiers"][i];
    std::string path = "$.tiers[" + std::to_string(i) + "]";
    require(t.is_array(), path, "expected an array of targets");
    AttackerTier tier;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto& ref = t[k];
      std::string rpath = path + "[" + std::to_string(k) + "]";
      require(ref.is_object() && ref.contains("asset") && ref["asset"].is_string(), rpath + ".asset", "expected a string");
      require(ref.contains("objective") && ref["objective"].is_string(), rpath + ".objective", "expected C, I or A");
      auto o = parse_objective(ref["objective"].get<std::string>());
      require(o.has_value(), rpath + ".objective", "expected C, I or A");
      tier.targets.push_back({ref["asset"].get<std::string>(), *o});
    }
    profile.tiers.push_back(std::move(tier));
  }
  return profile;
}

inline AttackerProfile parse_profile(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, "", std::string("invalid profile JSON: ") + e.what());
  }
  return profile_from_json(doc);
}

}  // namespace ctrlgame
