#pragma once

// Batch front end: validate | cases | matrix | solve.
//
// Exit codes: 0 success, 1 domain outcome (no feasible combination, limits
// exceeded), 2 usage or input errors.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ctrlgame/algebra.hpp"
#include "ctrlgame/catalogue.hpp"
#include "ctrlgame/catalogue_io.hpp"
#include "ctrlgame/profile.hpp"
#include "ctrlgame/report.hpp"
#include "ctrlgame/solver.hpp"
#include "ctrlgame/valuation.hpp"

namespace ctrlgame {

namespace cli_detail {

inline std::string read_source(const std::string& path, std::istream& in) {
  if (path == "-") return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::InvalidArgument, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

inline SpecFormat pick_format(const std::string& override_, const std::string& path, std::string_view text) {
  if (override_ == "csv") return SpecFormat::Csv;
  if (override_ == "json") return SpecFormat::Json;
  if (path.ends_with(".json")) return SpecFormat::Json;
  if (path.ends_with(".csv")) return SpecFormat::Csv;
  return sniff_format(text);
}

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoFeasibleCombination:
    case ErrorCode::ExpansionLimitExceeded:
    case ErrorCode::CaseLimitExceeded:
    case ErrorCode::TooLargeForOracle:
      return 1;
    default:
      return 2;
  }
}

inline std::string count(std::uint64_t n, const std::string& noun) {
  return std::to_string(n) + " " + noun + (n == 1 ? "" : "s");
}

inline unsigned default_threads() {
  if (const char* env = std::getenv("CTRLGAME_THREADS")) {
    try {
      auto n = std::stoul(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

}  // namespace cli_detail

/// Runs one invocation. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Security control selection game solver", "ctrlgame"};
  app.require_subcommand(1);

  std::string spec_path, spec_format, budget_text, profile_path, output_format = "text", output_path;
  std::uint64_t expansion_limit = kDefaultExpansionLimit, case_limit = kDefaultCaseLimit;
  std::size_t case_number = 1;
  unsigned threads = cli_detail::default_threads();
  bool show_stats = false;

  auto add_spec = [&](CLI::App* sub) {
    sub->add_option("--spec", spec_path, "Control specification file (CSV or JSON); '-' reads stdin")->required();
    sub->add_option("--spec-format", spec_format, "Override spec format detection")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--format", output_format, "Output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--output,-o", output_path, "Write output to a file instead of stdout");
  };

  auto* validate = app.add_subcommand("validate", "Check a specification file and summarize it");
  add_spec(validate);
  auto* cases = app.add_subcommand("cases", "List uncertainty cases");
  add_spec(cases);
  cases->add_option("--case-limit", case_limit, "Maximum number of cases");
  add_output(cases);
  auto* matrix = app.add_subcommand("matrix", "Print the game matrix of a small family");
  add_spec(matrix);
  matrix->add_option("--budget", budget_text, "Budget")->required();
  matrix->add_option("--case", case_number, "1-based uncertainty case")->check(CLI::PositiveNumber);
  matrix->add_option("--expansion-limit", expansion_limit, "Maximum combinations to materialize");
  matrix->add_option("--case-limit", case_limit, "Maximum number of cases");
  add_output(matrix);
  auto* solve_cmd = app.add_subcommand("solve", "Find the suggested combinations for every case");
  add_spec(solve_cmd);
  solve_cmd->add_option("--budget", budget_text, "Budget")->required();
  solve_cmd->add_option("--profile", profile_path, "Attacker profile JSON")->required();
  solve_cmd->add_option("--threads", threads, "Worker threads (default: CTRLGAME_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--case-limit", case_limit, "Maximum number of cases");
  solve_cmd->add_flag("--stats", show_stats, "Print solver statistics to stderr");
  add_output(solve_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::ostringstream buffer;
  auto flush = [&]() -> bool {
    if (output_path.empty()) {
      out << buffer.str();
      return true;
    }
    std::ofstream file(output_path, std::ios::binary);
    file << buffer.str();
    if (!file) {
      err << "error: cannot write '" << output_path << "'\n";
      return false;
    }
    return true;
  };

  try {
    auto text = cli_detail::read_source(spec_path, in);
    auto format = cli_detail::pick_format(spec_format, spec_path, text);
    ControlCatalogue cat;
    try {
      cat = parse_catalogue(text, format);
    } catch (const ParseError& e) {
      err << spec_path << ": " << to_string(e.code()) << ": " << e.what() << "\n";
      return 2;
    }

    if (validate->parsed()) {
      std::size_t mandatory = 0;
      for (const auto& c : cat.controls()) mandatory += c.mandatory ? 1 : 0;
      auto uncertain = cat.uncertain_cells().size();
      using cli_detail::count;
      out << "OK: " << count(cat.controls().size(), "control") << " (" << mandatory << " mandatory, "
          << cat.controls().size() - mandatory << " optional), " << count(cat.assets().size(), "asset") << ", "
          << count(cat.rules().size(), "requirement rule") << ", " << count(uncertain, "uncertain cell") << ", "
          << count(cat.case_count(), "case") << "\n";
      return 0;
    }

    if (cases->parsed()) {
      auto all = enumerate_cases(cat, case_limit);
      if (output_format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& c : all) {
          nlohmann::json a = nlohmann::json::array();
          for (const auto& key : cat.uncertain_cells())
            a.push_back({{"control", key.control.str()},
                         {"asset", key.target.asset},
                         {"objective", std::string(1, to_char(key.target.objective))},
                         {"rating", std::string(to_string(c.assignment.at(key)))}});
          j.push_back(std::move(a));
        }
        buffer << nlohmann::json{{"case_count", all.size()}, {"cases", j}}.dump(2) << "\n";
      } else {
        buffer << all.size() << (all.size() == 1 ? " case\n" : " cases\n");
        for (std::size_t i = 0; i < all.size(); ++i) {
          buffer << "Case " << i + 1 << ":";
          bool first = true;
          for (const auto& key : cat.uncertain_cells()) {
            buffer << (first ? " " : "; ") << key.control.str() << " " << key.target.label() << " = "
                   << to_string(all[i].assignment.at(key));
            first = false;
          }
          if (first) buffer << " (no uncertain cells)";
          buffer << "\n";
        }
      }
      return flush() ? 0 : 2;
    }

    auto budget = Budget::parse(budget_text);

    if (matrix->parsed()) {
      auto all = enumerate_cases(cat, case_limit);
      if (case_number > all.size()) {
        err << "error: case " << case_number << " out of range (" << all.size() << " cases)\n";
        return 2;
      }
      const auto& case_ = all[case_number - 1];
      auto family = filter_by_requirements(normalize(family_of(cat), expansion_limit), cat.rules());
      auto rows = game_matrix(family, case_, cat, budget);
      auto targets = cat.targets();
      if (output_format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& row : rows) {
          std::vector<std::string> ids;
          for (const auto& id : row.combo) ids.push_back(id.str());
          nlohmann::json payoffs = nlohmann::json::object();
          for (const auto& [t, v] : row.payoffs)
            payoffs[t.label()] = {{"exact", to_fraction_string(v)}, {"approx", to_decimal_string(v)}};
          j.push_back({{"combo", ids}, {"cost", row.cost.to_string()}, {"payoffs", payoffs}});
        }
        buffer << nlohmann::json{{"case", case_number}, {"rows", j}}.dump(2) << "\n";
      } else {
        buffer << "Game matrix for case " << case_number << " (" << rows.size() << " valid combinations)\n";
        buffer << "Combination\tCost";
        for (const auto& t : targets) buffer << "\t" << t.label();
        buffer << "\n";
        for (const auto& row : rows) {
          std::string ids;
          for (const auto& id : row.combo) ids += (ids.empty() ? "" : "+") + id.str();
          buffer << (ids.empty() ? "{}" : ids) << "\t" << row.cost.to_string();
          for (const auto& t : targets) buffer << "\t" << to_decimal_string(row.payoffs.at(t));
          buffer << "\n";
        }
      }
      return flush() ? 0 : 2;
    }

    // solve
    auto profile_text = cli_detail::read_source(profile_path, in);
    AttackerProfile profile;
    try {
      profile = parse_profile(profile_text);
      validate_profile(profile, cat);
    } catch (const Error& e) {
      err << profile_path << ": " << e.what() << "\n";
      return 2;
    }
    SolveOptions options;
    options.threads = threads;
    options.case_limit = case_limit;
    auto outcome = solve(cat, budget, profile, options);
    auto doc = build_report(outcome, cat, budget, profile);
    buffer << render(doc, output_format == "json" ? ReportFormat::Json : ReportFormat::Text);
    if (show_stats)
      err << "nodes explored: " << outcome.stats.nodes
          << ", inert controls excluded: " << outcome.stats.inert_controls_excluded
          << ", wall time: " << outcome.stats.wall_seconds << " s\n";
    if (!flush()) return 2;
    for (const auto& c : outcome.cases)
      if (!c.feasible) {
        err << "no feasible combination within budget " << budget.limit.to_string() << "\n";
        return 1;
      }
    return 0;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return cli_detail::exit_code_for(e.code());
  }
}

}  // namespace ctrlgame
