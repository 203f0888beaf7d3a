#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hsl/inversion.hpp"

namespace hsl::cli {

/// Flat key-value scenario file.
///
///   # comment
///   k = 2.0
///   sources = [[1.0, 0.1, 0.0, 0.2], [0.5, -0.3, 0.0, 0.0]]
///   eps = [1e-4, 1e-3]
///   mode = multi
///
/// Values are scalars, strings, flat lists or lists of lists. Unknown keys are rejected when the
/// scenario is assembled so typos do not go unnoticed.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return raw_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { raw_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return raw_; }

  double number(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::vector<double>> rows(const std::string& key) const;

 private:
  std::string origin_;
  std::map<std::string, std::string> raw_;
};

/// Every setting a subcommand may need, with defaults.
struct Scenario {
  double k = 2.0;
  double R0 = 2.0;          ///< half side of the CGO cube and the constant entering theta
  double rho_omega = 0.95;  ///< radius of the measurement sphere
  PointSourceSet sources;
  Medium medium;

  int forward_n = 32;
  double tol = 1e-10;
  int n_theta = 24;
  int n_phi = 48;

  int cgo_n = 32;
  std::vector<double> cgo_t{2.0, 4.0, 8.0};
  Vec3 cgo_direction = Vec3::UnitZ();
  double C_L = 0.0;  ///< 0: estimated on the CGO grid

  std::string data;  ///< Cauchy data CSV for `invert`
  std::string mode = "multi";
  Vec3 init = Vec3::Zero();
  MultiRecoveryOptions recovery;

  std::vector<double> eps{1e-5, 1e-4, 1e-3, 1e-2};
  int seeds = 4;
  std::uint64_t seed = 1;
  int lattice_n = 0;

  double carleman_eps = 0.2;
  double carleman_outer = 1.0;
  int carleman_fields = 10;
  int carleman_taus = 7;
  int carleman_radial = 96;
  int carleman_angular = 24;
};

/// Builds the scenario; throws ConfigError on unknown keys, malformed values or an
/// inadmissible source set.
Scenario make_scenario(const Config& cfg);

/// Smaller discretizations for smoke runs.
void apply_quick(Scenario& s);

}  // namespace hsl::cli
