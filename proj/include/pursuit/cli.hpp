#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pursuit/field_grid.hpp"

namespace pursuit::cli {

enum class Verb { simulate, threshold, compare, homogenize, counterexample, validate };

std::string to_string(Verb v);

struct Overrides {
  std::optional<double> dt;
  std::optional<std::vector<double>> epsilons;
  std::optional<Region> region;
};

struct Command {
  Verb verb = Verb::validate;
  std::string scenario;  // empty: verb default (threshold, counterexample)
  std::string against;   // compare: second scenario, audited as the lower family
  std::string out;       // empty: no artifacts, report on stdout only
  Overrides overrides;

  std::optional<double> cf;   // threshold
  std::optional<double> tau;  // threshold
  std::optional<std::string> expect;  // homogenize: required verdict
  double s_time = 1.0;                // counterexample
  double h = 0.5;                     // counterexample
  double dx = 1e-3;                   // homogenize: macro grid
  std::size_t stride = 1;             // simulate: CSV time stride
  unsigned workers = 1;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 validation/input error, 2 audit failure
  nlohmann::ordered_json entry;
};

// Executes one verb. Artifacts go to c.out, file names prefixed by `prefix`.
// Library errors are caught and reported in the entry.
RunResult run(const Command& c, const std::string& prefix = "");

// {"runs": [...]} in the given order.
nlohmann::ordered_json emit_report(const std::vector<RunResult>& results);

// Worst exit code of the runs: 1 beats 2 beats 0.
int combined_exit(const std::vector<RunResult>& results);

// Parses argv (chained verbs allowed), runs every verb, prints the report to
// `out` and writes report.json when --out is given.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace pursuit::cli
