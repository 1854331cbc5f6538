#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "ctrlgame/cli.hpp"
#include "test_support.hpp"

using namespace ctrlgame;
using namespace testing_support;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string sensors() { return data_path("ravenclaw_sensors.csv"); }
std::string sensors_profile() { return data_path("sensors_two_tier.json"); }

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("ctrlgame_cli_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

// Runs the real binary; returns the exit status.
int exec(const std::string& args, std::string* out = nullptr) {
  auto file = temp_dir() / "stdout.txt";
  auto cmd = std::string(CTRLGAME_CLI_PATH) + " " + args + " > " + file.string() + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  if (out) *out = read_text(file.string());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(CliTest, ValidateOk) {
  auto r = run({"validate", "--spec", sensors()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "OK: 47 controls (8 mandatory, 39 optional), 1 asset, 17 requirement rules, 1 uncertain cell, 2 cases\n");
}

TEST(CliTest, ValidateBadRating) {
  auto r = run({"validate", "--spec", data_path("bad_rating.csv")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("UnknownRating"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("row 4, column 6"), std::string::npos) << r.err;
}

TEST(CliTest, CasesCount) {
  auto r = run({"cases", "--spec", data_path("twocell.csv")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "4 cases");
  EXPECT_NE(r.out.find("Case 1: u Server:I = High; w Server:C = Medium"), std::string::npos) << r.out;
  r = run({"cases", "--spec", data_path("twocell.csv"), "--format", "json"});
  EXPECT_EQ(nlohmann::json::parse(r.out)["case_count"], 4);
  r = run({"cases", "--spec", data_path("twocell.csv"), "--case-limit", "3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("CaseLimitExceeded"), std::string::npos);
}

TEST(CliTest, SolveSensors) {
  auto r = run({"solve", "--spec", sensors(), "--budget", "950000", "--profile", sensors_profile(), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = report_from_json(nlohmann::json::parse(r.out));
  EXPECT_EQ(doc.metadata.case_count, 2u);
  // Compare with the oracle-free reference path: library call on the same inputs.
  auto cat = load_catalogue("ravenclaw_sensors.csv");
  auto p = parse_profile(read_text(sensors_profile()));
  Budget b{Money::from_units(950000)};
  EXPECT_EQ(doc, build_report(solve(cat, b, p), cat, b, p));
  for (const auto& g : doc.groups) EXPECT_LE(g.cost, b.limit);
}

TEST(CliTest, SolveByteStableAndThreadIndependent) {
  std::vector<std::string> base = {"solve", "--spec", data_path("twocell.csv"), "--budget", "4",
                                   "--profile", data_path("server_integrity.json")};
  for (const char* format : {"text", "json"}) {
    auto args = base;
    args.insert(args.end(), {"--format", format});
    auto first = run(args);
    ASSERT_EQ(first.code, 0);
    EXPECT_EQ(run(args).out, first.out);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "3"});
    EXPECT_EQ(run(threaded).out, first.out);
  }
}

TEST(CliTest, SolveFixedOutput) {
  auto r = run({"solve", "--spec", data_path("twocell.csv"), "--budget", "4", "--profile",
                data_path("server_integrity.json")});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out,
            "Suggested security control combinations\n"
            "Budget: 4\n"
            "Attacker profile:\n"
            "  Tier 1: Server:I\n"
            "  Tier 2: Server:C\n"
            "Cases: 4\n"
            "\n"
            "Case(s): 1, 2\n"
            "  Case 1: u Server:I = High; w Server:C = Medium\n"
            "  Case 2: u Server:I = High; w Server:C = High\n"
            "  Combination 1 (2 controls): m, u\n"
            "  Cost: 3\n"
            "  Tier 1 score: 0.8 (4/5)\n"
            "  Tier 2 score: 0.2 (1/5)\n"
            "\n"
            "Case(s): 3, 4\n"
            "  Case 3: u Server:I = Low; w Server:C = Medium\n"
            "  Case 4: u Server:I = Low; w Server:C = High\n"
            "  Combination 1 (2 controls): m, v\n"
            "  Cost: 4\n"
            "  Tier 1 score: 0.5 (1/2)\n"
            "  Tier 2 score: 0.2 (1/5)\n");
}

TEST(CliTest, SolveInfeasibleExitsOne) {
  auto r = run({"solve", "--spec", sensors(), "--budget", "1000", "--profile", sensors_profile()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("No feasible combination within budget"), std::string::npos);
}

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"solve", "--spec", sensors(), "--profile", sensors_profile()}).code, 2);
  EXPECT_EQ(run({"solve", "--spec", sensors(), "--budget", "-5", "--profile", sensors_profile()}).code, 2);
  EXPECT_EQ(run({"solve", "--spec", sensors(), "--budget", "1.001", "--profile", sensors_profile()}).code, 2);
  EXPECT_EQ(run({"solve", "--spec", "/nonexistent.csv", "--budget", "1", "--profile", sensors_profile()}).code, 2);
  EXPECT_EQ(run({"solve", "--spec", sensors(), "--budget", "1", "--profile", data_path("server_integrity.json")}).code,
            2);
  EXPECT_EQ(run({"solve", "--spec", sensors(), "--budget", "1", "--profile", sensors_profile(), "--threads", "0"}).code,
            2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliTest, StdinSpec) {
  auto text = read_text(data_path("twocell.csv"));
  auto r = run({"validate", "--spec", "-"}, text);
  EXPECT_EQ(r.code, 0) << r.err;
  auto json = write_catalogue_json(load_catalogue("twocell.csv"));
  r = run({"cases", "--spec", "-"}, json);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 7), "4 cases");
}

TEST(CliTest, OutputFile) {
  auto path = (temp_dir() / "report.json").string();
  auto r = run({"solve", "--spec", data_path("twocell.csv"), "--budget", "4", "--profile",
                data_path("server_integrity.json"), "--format", "json", "-o", path});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NO_THROW(report_from_json(nlohmann::json::parse(read_text(path))));
}

TEST(CliTest, Matrix) {
  auto r = run({"matrix", "--spec", data_path("twocell.csv"), "--budget", "5", "--case", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Game matrix for case 2 (4 valid combinations)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("m+u+w\t5\t0.84\t0.8\t0"), std::string::npos) << r.out;
  r = run({"matrix", "--spec", sensors(), "--budget", "950000"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("ExpansionLimitExceeded"), std::string::npos);
  r = run({"matrix", "--spec", data_path("twocell.csv"), "--budget", "5", "--case", "9"});
  EXPECT_EQ(r.code, 2);
}

TEST(CliTest, ThreadsFromEnvironment) {
  std::vector<std::string> args = {"solve", "--spec", data_path("twocell.csv"), "--budget", "4",
                                   "--profile", data_path("server_integrity.json")};
  auto plain = run(args);
  ::setenv("CTRLGAME_THREADS", "3", 1);
  EXPECT_EQ(cli_detail::default_threads(), 3u);
  auto env = run(args);
  ::unsetenv("CTRLGAME_THREADS");
  EXPECT_EQ(env.out, plain.out);
}

TEST(CliBinaryTest, ExitCodes) {
  std::string a, b;
  auto args = "solve --spec " + data_path("twocell.csv") + " --budget 4 --profile " +
              data_path("server_integrity.json") + " --format json";
  EXPECT_EQ(exec(args, &a), 0);
  EXPECT_EQ(exec(args + " --threads 2", &b), 0);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(exec("validate --spec " + data_path("bad_rating.csv")), 2);
  EXPECT_EQ(exec("solve --spec " + sensors() + " --budget 10 --profile " + sensors_profile()), 1);
  EXPECT_EQ(exec("solve --spec " + sensors()), 2);
}
