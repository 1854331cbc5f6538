#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace ctrlgame;
using namespace testing_support;

namespace {

const char* kHeader = "Control,Cost,Mandatory,Requires,Sensors,,\n,,,,C,I,A\n";

ParseError parse_error_of(const std::string& text, SpecFormat format = SpecFormat::Csv) {
  try {
    parse_catalogue(text, format);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return ParseError(0, "", "none");
}

}  // namespace

TEST(RatingTest, Values) {
  EXPECT_EQ(rating_value(Rating::None), Rational(0));
  EXPECT_EQ(rating_value(Rating::Low), Rational(1, 5));
  EXPECT_EQ(rating_value(Rating::Medium), Rational(1, 2));
  EXPECT_EQ(rating_value(Rating::High), Rational(4, 5));
  EXPECT_EQ(rating_value(Rating::VeryHigh), Rational(9, 10));
  for (auto r : kAllRatings) EXPECT_LT(rating_value(r), Rational(1));
  EXPECT_EQ(parse_rating("very high"), Rating::VeryHigh);
  EXPECT_EQ(parse_rating("MEDIUM"), Rating::Medium);
  EXPECT_FALSE(parse_rating("Hihg"));
}

TEST(CsvTest, SingleRow) {
  auto cat = parse_catalogue(std::string(kHeader) + "AC-7,10000,false,,None,Medium,Low\n", SpecFormat::Csv);
  ASSERT_EQ(cat.controls().size(), 1u);
  const auto& e = cat.controls()[0];
  EXPECT_EQ(e.id.str(), "AC-7");
  EXPECT_EQ(e.cost, Money::from_units(10000));
  EXPECT_FALSE(e.mandatory);
  Case none;
  EXPECT_EQ(resolve_rating(e, {"Sensors", Objective::C}, none), Rating::None);
  EXPECT_EQ(resolve_rating(e, {"Sensors", Objective::I}, none), Rating::Medium);
  EXPECT_EQ(resolve_rating(e, {"Sensors", Objective::A}, none), Rating::Low);
}

TEST(CsvTest, UncertainCellAndDependencies) {
  auto cat = parse_catalogue(std::string(kHeader) +
                                 "AU-1,20000,true,,,,\n"
                                 "AU-2,40000,false,AU-1,,Low|Medium,\n"
                                 "AU-3,30000,false,AU-1,,,\n"
                                 "AU-12,30000,false,AU-1+AU-2+AU-3,,,\n",
                             SpecFormat::Csv);
  const auto* cell = cat.at(ControlId("AU-2")).cell({"Sensors", Objective::I});
  ASSERT_NE(cell, nullptr);
  EXPECT_EQ(cell->options(), (std::vector<Rating>{Rating::Low, Rating::Medium}));
  EXPECT_EQ(cat.rules().back(), RequirementRule(ControlId("AU-12"), make_combination({"AU-1", "AU-2", "AU-3"})));
  EXPECT_EQ(cat.case_count(), 2u);
}

TEST(CsvTest, QuotedFieldsAndNameColumn) {
  auto cat = parse_catalogue(
      "Control,Name,Cost,Mandatory,Requires,Hub,,\n,,,,,C,I,A\n"
      "a,\"Access, \"\"policy\"\"\",1.50,TRUE,,High,,\n",
      SpecFormat::Csv);
  EXPECT_EQ(cat.controls()[0].name, "Access, \"policy\"");
  EXPECT_EQ(cat.controls()[0].cost.to_string(), "1.50");
  EXPECT_TRUE(cat.controls()[0].mandatory);
}

TEST(CsvTest, ErrorsNamePosition) {
  auto e = parse_error_of(std::string(kHeader) + "a,1,false,,Low,,\nb,2,false,,,Hihg,\n");
  EXPECT_EQ(e.code(), ErrorCode::UnknownRating);
  EXPECT_EQ(e.line(), 4u);
  EXPECT_NE(std::string(e.what()).find("column 6"), std::string::npos);

  e = parse_error_of(std::string(kHeader) + "a,1,false,,,,\na,2,false,,,,\n");
  EXPECT_EQ(e.code(), ErrorCode::DuplicateControl);
  EXPECT_EQ(e.line(), 4u);

  e = parse_error_of(std::string(kHeader) + "a,1,false,zz,,,\n");
  EXPECT_EQ(e.code(), ErrorCode::UnknownControlInDependency);
  EXPECT_EQ(e.line(), 3u);

  e = parse_error_of(std::string(kHeader) + "a,-1,false,,,,\n");
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
  e = parse_error_of(std::string(kHeader) + "a,1.234,false,,,,\n");
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
  e = parse_error_of(std::string(kHeader) + "a,1,maybe,,,,\n");
  EXPECT_EQ(e.line(), 3u);
  e = parse_error_of(std::string(kHeader) + "a,1,false,a,,,\n");
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
  e = parse_error_of(std::string(kHeader) + "a,1,false,,Low|Low,,\n");
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
  e = parse_error_of("Control,Cost,Mandatory,Requires,Sensors,,\n,,,,C,A,I\n");
  EXPECT_EQ(e.line(), 2u);
  e = parse_error_of("Ctrl,Cost,Mandatory,Requires,Sensors,,\n,,,,C,I,A\n");
  EXPECT_EQ(e.line(), 1u);
  e = parse_error_of(std::string(kHeader) + "a,1,false,,,,,Low\n");
  EXPECT_EQ(e.line(), 3u);
}

TEST(JsonTest, ParseAndErrors) {
  auto cat = parse_catalogue(R"({"assets":["S"],"controls":[
      {"id":"m","cost":"5","mandatory":true},
      {"id":"x","name":"X","cost":"1.25","mandatory":false,"requires":[["m"]],
       "effectiveness":{"S":{"C":["High"],"I":["Low","VeryHigh"]}}}]})",
                             SpecFormat::Json);
  EXPECT_EQ(cat.controls().size(), 2u);
  EXPECT_EQ(cat.rules().size(), 1u);
  EXPECT_EQ(cat.case_count(), 2u);

  auto e = parse_error_of(R"({"assets":["S"],"controls":[{"id":"x","cost":"1","mandatory":false,
      "effectiveness":{"S":{"C":["Hgh"]}}}]})",
                          SpecFormat::Json);
  EXPECT_EQ(e.code(), ErrorCode::UnknownRating);
  EXPECT_EQ(e.field(), "$.controls[0].effectiveness.S.C");
  e = parse_error_of(R"({"assets":["S"],"controls":[{"id":"x","cost":"1","mandatory":false},
      {"id":"x","cost":"1","mandatory":false}]})",
                     SpecFormat::Json);
  EXPECT_EQ(e.code(), ErrorCode::DuplicateControl);
  e = parse_error_of(R"({"assets":["S"],"controls":[{"id":"x","cost":"1","mandatory":false,"requires":[["y"]]}]})",
                     SpecFormat::Json);
  EXPECT_EQ(e.code(), ErrorCode::UnknownControlInDependency);
  e = parse_error_of(R"({"assets":["S"],"controls":[{"id":"x","cost":"1","mandatory":false,
      "effectiveness":{"T":{"C":["Low"]}}}]})",
                     SpecFormat::Json);
  EXPECT_EQ(e.field(), "$.controls[0].effectiveness.T");
  e = parse_error_of("{not json", SpecFormat::Json);
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
}

TEST(CatalogueTest, SensorsFixture) {
  auto cat = load_catalogue("ravenclaw_sensors.csv");
  EXPECT_EQ(cat.controls().size(), 47u);
  std::size_t mandatory = 0;
  for (const auto& c : cat.controls()) mandatory += c.mandatory;
  EXPECT_EQ(mandatory, 8u);
  EXPECT_EQ(cat.assets(), std::vector<std::string>{"Sensors"});
  EXPECT_EQ(cat.case_count(), 2u);
  EXPECT_EQ(estimated_size(family_of(cat)), std::uint64_t{1} << 39);
}

TEST(CatalogueTest, FamilyOf) {
  auto cat = parse_catalogue(std::string(kHeader) + "m,1,true,,,,\no,1,false,,,,\n", SpecFormat::Csv);
  NormalFamily expected;
  expected.combos = {make_combination({"m"}), make_combination({"m", "o"})};
  EXPECT_EQ(normalize(family_of(cat)), expected);

  auto only_mandatory = parse_catalogue(std::string(kHeader) + "m,1,true,,,,\nn,1,true,,,,\n", SpecFormat::Csv);
  EXPECT_EQ(normalize(family_of(only_mandatory)).combos, std::set<Combination>{make_combination({"m", "n"})});
}

TEST(CaseTest, Enumeration) {
  auto none = parse_catalogue(std::string(kHeader) + "a,1,false,,Low,,\n", SpecFormat::Csv);
  auto cases = enumerate_cases(none);
  ASSERT_EQ(cases.size(), 1u);
  EXPECT_TRUE(cases[0].assignment.empty());

  auto two = load_catalogue("twocell.csv");
  cases = enumerate_cases(two);
  ASSERT_EQ(cases.size(), 4u);
  auto cells = two.uncertain_cells();
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].control.str(), "u");
  EXPECT_EQ(cases[0].assignment.at(cells[0]), Rating::High);
  EXPECT_EQ(cases[0].assignment.at(cells[1]), Rating::Medium);
  EXPECT_EQ(cases[1].assignment.at(cells[0]), Rating::High);
  EXPECT_EQ(cases[1].assignment.at(cells[1]), Rating::High);
  EXPECT_EQ(cases[2].assignment.at(cells[0]), Rating::Low);

  try {
    enumerate_cases(two, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CaseLimitExceeded);
  }
}

TEST(CaseTest, CellOrderWithinControl) {
  auto cat = parse_catalogue(
      "Control,Cost,Mandatory,Requires,P,,,Q,,\n,,,,C,I,A,C,I,A\n"
      "a,1,false,,,,Low|High,Medium|Low,,\n"
      "b,1,false,,Low|High|Medium,,,,,\n",
      SpecFormat::Csv);
  auto cells = cat.uncertain_cells();
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0].target.label(), "P:A");
  EXPECT_EQ(cells[1].target.label(), "Q:C");
  EXPECT_EQ(cells[2].control.str(), "b");
  EXPECT_EQ(enumerate_cases(cat).size(), 12u);
}

TEST(CaseTest, CountAndCoverageRandomized) {
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    auto inst = random_instance(rng, {.max_optional = 6, .max_uncertain = 3});
    auto cases = enumerate_cases(inst.cat);
    auto cells = inst.cat.uncertain_cells();
    std::uint64_t product = 1;
    for (const auto& k : cells) product *= inst.cat.at(k.control).cell(k.target)->options().size();
    ASSERT_EQ(cases.size(), product);
    std::set<std::map<CellKey, Rating>> distinct;
    for (const auto& c : cases) {
      ASSERT_EQ(c.assignment.size(), cells.size());
      for (const auto& k : cells) {
        const auto& opts = inst.cat.at(k.control).cell(k.target)->options();
        ASSERT_NE(std::find(opts.begin(), opts.end(), c.assignment.at(k)), opts.end());
      }
      distinct.insert(c.assignment);
    }
    ASSERT_EQ(distinct.size(), cases.size());
  }
}

TEST(RoundTripTest, Randomized) {
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    auto inst = random_instance(rng);
    auto csv_text = write_catalogue_csv(inst.cat);
    auto json_text = write_catalogue_json(inst.cat);
    auto from_csv = parse_catalogue(csv_text, SpecFormat::Csv);
    auto from_json = parse_catalogue(json_text, SpecFormat::Json);
    ASSERT_EQ(from_csv, inst.cat) << csv_text;
    ASSERT_EQ(from_json, inst.cat) << json_text;
    ASSERT_EQ(write_catalogue_csv(from_json), csv_text);
    ASSERT_EQ(write_catalogue_json(from_csv), json_text);
    ASSERT_EQ(catalogue_digest(from_csv), catalogue_digest(from_json));
  }
}

TEST(RoundTripTest, SensorsFixture) {
  auto cat = load_catalogue("ravenclaw_sensors.csv");
  EXPECT_EQ(parse_catalogue(write_catalogue_json(cat), SpecFormat::Json), cat);
  EXPECT_EQ(parse_catalogue(write_catalogue_csv(cat), SpecFormat::Csv), cat);
}

TEST(CatalogueTest, ExplicitNoneEqualsMissing) {
  auto a = parse_catalogue(std::string(kHeader) + "x,1,false,,None,Low,None\n", SpecFormat::Csv);
  auto b = parse_catalogue(std::string(kHeader) + "x,1,false,,,Low,\n", SpecFormat::Csv);
  EXPECT_EQ(a, b);
  EXPECT_EQ(catalogue_digest(a), catalogue_digest(b));
}

TEST(CatalogueTest, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
