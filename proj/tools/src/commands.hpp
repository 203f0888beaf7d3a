#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace hsl::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kSolverFailure = 3,
  kCheckFailed = 4,
};

/// Parses argv, runs one subcommand and maps library errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Built-in scenario texts addressable by name through --config.
const std::string* builtin_scenario(const std::string& name);

// Individual verbs; each writes its CSV into `out_dir` and returns the file path.
std::string write_forward(const Scenario& s, const std::string& out_dir);
std::string write_cgo(const Scenario& s, const std::string& out_dir);
std::string write_invert(const Scenario& s, const std::string& out_dir);
std::string write_stability(const Scenario& s, const std::string& out_dir);
std::string write_carleman(const Scenario& s, const std::string& out_dir);
std::vector<std::string> write_dump(const Scenario& s, const std::string& out_dir);

/// Cauchy data CSV (theta,phi,re_u,im_u,re_dnu,im_dnu,weight) for a sphere of the given radius.
void write_cauchy_csv(const std::string& path, const CauchyData& d);
CauchyData read_cauchy_csv(const std::string& path, double radius);

struct SelftestLine {
  std::string name;
  bool pass = false;
  std::string detail;
};
std::vector<SelftestLine> selftest(bool quick);

}  // namespace hsl::cli
