#pragma once

#include <memory>
#include <vector>

#include "hsl/cgo.hpp"
#include "hsl/forward.hpp"

namespace hsl {

/// A solution v of (Delta + k^2 (1 + q)) v = 0 with value and gradient anywhere in Omega:
/// either the plane wave exp(i x.xi) (q = 0) or a CGO solution built by build_cgo.
class TestSolution {
 public:
  static TestSolution plane_wave(const CgoParameter& xi);
  static TestSolution cgo(std::shared_ptr<const CgoSolution> sol);

  const CgoParameter& parameter() const { return parameter_; }
  bool is_plane_wave() const { return !cgo_; }
  const CgoSolution* cgo_solution() const { return cgo_.get(); }
  ValueGradient eval(const Vec3& x) const;
  cplx value(const Vec3& x) const { return eval(x).value; }

 private:
  CgoParameter parameter_;
  std::shared_ptr<const CgoSolution> cgo_;
};

struct PairingValue {
  CgoParameter xi;
  cplx value = 0.0;
  /// |full rule - rule on every other azimuthal node|, a proxy for the quadrature error.
  double quadrature_estimate_error = 0.0;
};

/// int_{dOmega} (d_nu u) v - u (d_nu v) dS by the sphere's quadrature. For exact data of
/// sources {(a_i, z_i)} this equals sum a_i v(z_i).
PairingValue boundary_pairing(const CauchyData& data, const TestSolution& v);

/// Closed-form constants of the single-source stability theorem.
struct RecoveryConstants {
  double M = 0.0;
  double M_G = 0.0;      ///< evaluated at |Im xi| = M
  double C_L = 0.0;
  double C_s = 0.0;      ///< taken equal to C_L
  double q_h2 = 0.0;
  double q_c0 = 0.0;
  double q_c2 = 0.0;
  std::vector<double> candidates;  ///< the five entries of the max defining M
  double log_C_a = 0.0;  ///< natural logarithms; the constants themselves overflow easily
  double log_C_z = 0.0;
};

/// M is the smallest value meeting all five candidates with M_G evaluated at M itself
/// (M_G decreases in |Im xi|, so the fixed point is found in closed form).
RecoveryConstants constants_M_MG(const Medium& q, double k, const CubeGrid& grid, double C_L, double omega_radius);

/// Orthonormal frame with e2 = (z1 - z2)/|z1 - z2|, e3 = e0 x e2, e1 = e3 x e2.
/// Throws DegenerateInputError when z1 == z2.
Mat3 separation_frame(const Vec3& z1, const Vec3& z2);

struct AmplitudeXi {
  CgoParameter xi;
  double t2 = 0.0;
  double log_ratio = 0.0;  ///< ln|v(z1)| - ln|v(z2)| at the root
  int evaluations = 0;
};

/// t1 = M, t2 found by bisection on [-2 M_G C_L, 2 M_G C_L] (widened once if needed) so that
/// |v(z1)| = |v(z2)|.
AmplitudeXi select_xi_amplitude(const Vec3& z1, const Vec3& z2, const RecoveryConstants& c, const Medium& q, double k,
                                const CubeGrid& grid, const CgoOptions& opts = {});

/// t1 = t2 = M in the separation frame.
CgoParameter select_xi_location(const Vec3& z1, const Vec3& z2, double M, double k);

/// Both sides of |a1 - a2| <= |P| e^{5 R0 |Im xi|} |dOmega|^{1/2} / |v(z1)|, with P the pairing
/// of the data difference. The right side is kept in log form.
struct AmplitudeCertificate {
  double lhs = 0.0;
  double pairing_bound = 0.0;  ///< |P| / |v(z1)|, the sharper intermediate bound
  double log_rhs = 0.0;
  bool holds() const { return std::log(lhs) <= log_rhs || lhs == 0.0; }
};
AmplitudeCertificate amplitude_certificate(const CauchyData& d1, const CauchyData& d2, double a1, double a2,
                                           const Vec3& z1, const AmplitudeXi& xi, const Medium& q,
                                           const CubeGrid& grid, const CgoOptions& opts = {});

/// Mean-value lower bound |Re(v(z1) - v(z2))| >= M_G C_L |dz| e^{-2 M R0} at the location xi.
struct LocationCertificate {
  double lhs = 0.0;
  double rhs = 0.0;
  double rhs_q0 = 0.0;  ///< (11/12) M |dz| e^{-2 M R0}
  bool holds() const { return lhs >= rhs; }
};
LocationCertificate location_certificate(const Vec3& z1, const Vec3& z2, const RecoveryConstants& c, const Medium& q,
                                         double k, const CubeGrid& grid, const CgoOptions& opts = {});

/// Search region for the imaging functional: an n^3 lattice on a cube, restricted to a ball.
struct SearchGrid {
  double half_width = 1.0;
  int n = 41;
  double ball_radius = 1.0;
  Vec3 point(int i, int j, int l) const;
  double spacing() const { return 2.0 * half_width / (n - 1); }
};

/// Values on the full search lattice (row-major), -1 outside the ball.
struct HeatMap {
  SearchGrid grid;
  std::vector<Vec3> points;
  std::vector<double> values;
  std::size_t argmax = 0;
};

/// Nearly uniform unit directions (Fibonacci lattice).
std::vector<Vec3> fibonacci_directions(int count);

/// Direction count that resolves the backprojection sum over a ball of the given radius.
int auto_direction_count(double k, double radius);

/// I(z) = |sum_j w_j P(d_j) exp(-i k z.d_j)| over real plane-wave directions d_j.
/// n_directions = 0 selects auto_direction_count(k, grid.ball_radius).
HeatMap imaging_functional(const CauchyData& data, double k, const SearchGrid& grid, int n_directions);

/// Greedy extraction on the complex backprojection: the strongest lattice point is taken, the
/// plane-wave pairings are refitted by least squares on all peaks so far and the backprojection
/// of the remainder is searched next, with balls of radius `exclusion` around peaks masked.
/// Stops below `fraction` of the first maximum or after max_peaks + 1 peaks.
std::vector<Vec3> clean_peaks(const CauchyData& data, double k, const SearchGrid& grid, int n_directions,
                              double exclusion, double fraction, int max_peaks);

struct RecoveryOptions {
  int n_real = 12;          ///< plane-wave-type parameters
  int n_complex = 2;        ///< mildly complex parameters
  double t_complex = 0.5;   ///< |Im xi| of the complex members
  double t_floor = 0.25;    ///< |Im xi| used for plane-wave-type members when q != 0
  double cgo_R0 = 2.0;
  int cgo_n = 48;
  CgoOptions cgo;
  int max_iter = 100;
  double step_tol = 1e-10;
  double degenerate_amplitude = 1e-8;
  double max_radius = 0.0;  ///< fitted locations beyond this radius are rejected (0: no limit)
};

/// The xi-family used by the recovery: directions e3 from a Fibonacci lattice.
std::vector<CgoParameter> recovery_family(double k, const RecoveryOptions& opts, bool medium_present);

/// Test solutions of the family with their data pairings, computed once per data set.
struct PairedFamily {
  std::vector<TestSolution> tests;
  std::vector<cplx> pairings;
};
PairedFamily pair_family(const CauchyData& data, const Medium& q, double k, const RecoveryOptions& opts);
PairedFamily pair_family(const CauchyData& data, const std::vector<TestSolution>& tests);
std::vector<TestSolution> build_tests(const Medium& q, double k, const RecoveryOptions& opts, int extra_real = 0);

struct SourceFit {
  cplx amplitude = 0.0;
  Vec3 location = Vec3::Zero();
};

struct SingleSourceFit {
  cplx amplitude = 0.0;
  Vec3 location = Vec3::Zero();
  double residual = 0.0;   ///< (sum |P_j - a v_j(z)|^2)^{1/2}
  int iterations = 0;
  bool converged = false;
  bool amplitude_degenerate = false;
};

/// Gauss-Newton over (Re a, Im a, z) for the model P_j = a v_j(z). Throws SolverError after five
/// consecutive residual increases.
SingleSourceFit recover_single_source(const CauchyData& data, const Medium& q, double k, const Vec3& init_z,
                                      const RecoveryOptions& opts = {});
SingleSourceFit fit_single_source(const PairedFamily& fam, const Vec3& init_z, const RecoveryOptions& opts = {});

/// Joint Gauss-Newton for P_j = sum_i a_i v_j(z_i).
struct MultiSourceFit {
  std::vector<SourceFit> sources;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};
MultiSourceFit fit_sources(const PairedFamily& fam, const std::vector<SourceFit>& init, const RecoveryOptions& opts = {});

struct RecoveryResult {
  PointSourceSet recovered;           ///< real parts of the fitted amplitudes
  std::vector<SourceFit> fits;        ///< complex amplitudes, sorted like `recovered`
  std::vector<Vec3> peaks;            ///< imaging peaks used as initial guesses
  double residual = 0.0;
  int iterations = 0;
  bool admissible = true;
};

struct MultiRecoveryOptions {
  RecoveryOptions fit;
  SearchGrid search;
  int n_directions = 0;  ///< 0: auto_direction_count
  double peak_fraction = 0.1;
  int N0 = 8;
};

/// clean_peaks (6 eta exclusion) as initial guesses, then a joint fit; fitted sources below
/// peak_fraction of the strongest amplitude are dropped and the rest refitted.
/// Throws ModelOrderError when more than N0 peaks are found.
RecoveryResult recover_multi_source(const CauchyData& data, const Medium& q, double k, double eta,
                                    const MultiRecoveryOptions& opts);

/// Local maxima of a heat map, strongest first, separated by at least `exclusion`.
std::vector<std::size_t> extract_peaks(const HeatMap& map, double exclusion, double fraction);

struct Matching {
  std::vector<int> pi;       ///< pi[j] = index in S2 or -1
  std::vector<int> matched;  ///< the set N
  std::vector<int> only_1;   ///< N1 = {1..N1} \ N
  std::vector<int> only_2;   ///< N2 = {1..N2} \ pi(N)
};

/// Pairs each source of S1 with the source of S2 in its 3 eta ball.
Matching match_sources(const PointSourceSet& S1, const PointSourceSet& S2, double eta);

}  // namespace hsl
