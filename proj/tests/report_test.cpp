#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace ctrlgame;
using namespace testing_support;

namespace {

// u's integrity rating decides the winner; the other two cells are noise.
const char* kEightCases =
    "Control,Cost,Mandatory,Requires,Server,,\n,,,,C,I,A\n"
    "m,0,true,,,,Low|Medium\n"
    "u,3,false,,,High|Low,\n"
    "v,4,false,,,Medium,\n"
    "w,9,false,,,,Low|High\n";

ReportDocument report_for(const ControlCatalogue& cat, const Budget& b, const AttackerProfile& p) {
  return build_report(solve(cat, b, p), cat, b, p);
}

}  // namespace

TEST(ReportTest, SplitFourFour) {
  auto cat = parse_catalogue(kEightCases, SpecFormat::Csv);
  auto doc = report_for(cat, Budget{Money::from_units(4)}, profile({{"Server:I"}}));
  ASSERT_EQ(doc.groups.size(), 2u);
  // m's cell varies slowest, then u's, then w's.
  EXPECT_EQ(doc.groups[0].cases, (std::vector<std::size_t>{1, 2, 5, 6}));
  EXPECT_EQ(doc.groups[1].cases, (std::vector<std::size_t>{3, 4, 7, 8}));
  EXPECT_EQ(doc.groups[0].combos, (std::vector<std::vector<std::string>>{{"m", "u"}}));
  EXPECT_EQ(doc.groups[1].combos, (std::vector<std::vector<std::string>>{{"m", "v"}}));
  EXPECT_EQ(doc.groups[0].assignments.size(), 12u);
  EXPECT_EQ(doc.metadata.case_count, 8u);
}

TEST(ReportTest, AllIdentical) {
  auto cat = parse_catalogue(kEightCases, SpecFormat::Csv);
  auto doc = report_for(cat, Budget{Money::from_units(4)}, profile({{"Server:C"}}));
  ASSERT_EQ(doc.groups.size(), 1u);
  EXPECT_EQ(doc.groups[0].cases.size(), 8u);
}

TEST(ReportTest, SingleCase) {
  auto cat = parse_catalogue("Control,Cost,Mandatory,Requires,S,,\n,,,,C,I,A\nx,1,false,,Low,,\n", SpecFormat::Csv);
  auto doc = report_for(cat, Budget{Money::from_units(1)}, profile({{"S:C"}}));
  ASSERT_EQ(doc.groups.size(), 1u);
  EXPECT_EQ(doc.groups[0].cases, std::vector<std::size_t>{1});
  EXPECT_TRUE(doc.groups[0].assignments.empty());
}

TEST(ReportTest, GroupingPartitionsRandomized) {
  Rng rng(64);
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng, {.max_optional = 8, .max_uncertain = 3});
    auto outcome = solve(inst.cat, inst.budget, inst.profile);
    auto doc = build_report(outcome, inst.cat, inst.budget, inst.profile);
    std::vector<int> seen(outcome.cases.size(), 0);
    std::size_t last_first = 0;
    for (const auto& g : doc.groups) {
      ASSERT_FALSE(g.cases.empty());
      ASSERT_GT(g.cases.front(), last_first);
      last_first = g.cases.front();
      for (auto id : g.cases) {
        ++seen[id - 1];
        ASSERT_TRUE(outcome.cases[id - 1].same_result(outcome.cases[g.cases.front() - 1]));
      }
    }
    for (int s : seen) ASSERT_EQ(s, 1);
    for (std::size_t a = 0; a < doc.groups.size(); ++a)
      for (std::size_t b = a + 1; b < doc.groups.size(); ++b)
        ASSERT_FALSE(outcome.cases[doc.groups[a].cases[0] - 1].same_result(outcome.cases[doc.groups[b].cases[0] - 1]));

    auto json_text = render(doc, ReportFormat::Json);
    ASSERT_EQ(report_from_json(nlohmann::json::parse(json_text)), doc);
    ASSERT_EQ(render(report_for(inst.cat, inst.budget, inst.profile), ReportFormat::Json), json_text);
  }
}

TEST(ReportTest, ThirtyControlTextListing) {
  auto cat = load_catalogue("ravenclaw_sensors.csv");
  auto p = profile({{"Sensors:C"}});
  SolveOutcome outcome;
  for (const auto& c : enumerate_cases(cat)) {
    auto combo = ids(kCombo11);
    outcome.cases.push_back({c, true, {combo}, {tier_score(combo, p.tiers[0], c, cat)}, cost(combo, cat)});
  }
  auto doc = build_report(outcome, cat, Budget{Money::from_units(950000)}, p);
  ASSERT_EQ(doc.groups.size(), 1u);
  auto text = render(doc, ReportFormat::Text);
  EXPECT_NE(text.find("Combination 1 (30 controls): AC-1, AC-2, AC-3, AC-4, AC-5, AC-6, AC-7, AC-9, AC-12,"),
            std::string::npos)
      << text;
  EXPECT_NE(text.find("Cost: 940000"), std::string::npos);
  EXPECT_NE(text.find("Case(s): 1, 2"), std::string::npos);
  EXPECT_NE(text.find("Tier 1 score: 0.9984 (624/625)"), std::string::npos) << text;
}

TEST(ReportTest, InfeasibleText) {
  auto cat = parse_catalogue("Control,Cost,Mandatory,Requires,S,,\n,,,,C,I,A\nm,5,true,,Low,,\n", SpecFormat::Csv);
  auto doc = report_for(cat, Budget{Money::from_units(1)}, profile({{"S:C"}}));
  auto text = render(doc, ReportFormat::Text);
  EXPECT_NE(text.find("No feasible combination within budget"), std::string::npos);
  auto j = report_to_json(doc);
  EXPECT_TRUE(j["groups"][0]["cost"].is_null());
  EXPECT_EQ(report_from_json(j), doc);
}

TEST(ReportTest, JsonSchemaShape) {
  auto cat = load_catalogue("twocell.csv");
  auto doc = report_for(cat, Budget{Money::from_units(4)}, profile({{"Server:I"}, {"Server:C"}}));
  auto j = nlohmann::json::parse(render(doc, ReportFormat::Json));
  ASSERT_TRUE(j.contains("metadata"));
  EXPECT_EQ(j["metadata"]["budget"], "4");
  EXPECT_EQ(j["metadata"]["catalogue_digest"].get<std::string>().size(), 64u);
  const auto& g = j["groups"][0];
  for (const char* key : {"cases", "assignments", "combos", "cost", "tier_scores"}) EXPECT_TRUE(g.contains(key)) << key;
  EXPECT_EQ(g["combos"][0], (nlohmann::json{"m", "u"}));
  EXPECT_EQ(g["tier_scores"][0]["exact"], "4/5");
  EXPECT_EQ(g["tier_scores"][0]["approx"], "0.8");
  EXPECT_EQ(g["assignments"][0]["control"], "u");
  EXPECT_EQ(g["assignments"][0]["objective"], "I");
}

TEST(ReportTest, NaturalIdOrder) {
  auto cat = parse_catalogue(
      "Control,Cost,Mandatory,Requires,S,,\n,,,,C,I,A\nAC-12,1,true,,Low,,\nAC-2,1,true,,Low,,\nAB-3,1,true,,,,\n",
      SpecFormat::Csv);
  auto doc = report_for(cat, Budget{Money::from_units(3)}, profile({{"S:C"}}));
  EXPECT_EQ(doc.groups[0].combos[0], (std::vector<std::string>{"AB-3", "AC-2", "AC-12"}));
}
