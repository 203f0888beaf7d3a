#include "hsl/inversion.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "hsl/parallel.hpp"

namespace hsl {

TestSolution TestSolution::plane_wave(const CgoParameter& xi) {
  TestSolution t;
  t.parameter_ = xi;
  return t;
}

TestSolution TestSolution::cgo(std::shared_ptr<const CgoSolution> sol) {
  if (!sol) throw DomainError("TestSolution: null CGO solution");
  TestSolution t;
  t.parameter_ = sol->parameter;
  t.cgo_ = std::move(sol);
  return t;
}

ValueGradient TestSolution::eval(const Vec3& x) const {
  const CVec3 xi = parameter_.xi();
  const cplx e = std::exp(kI * bilinear_dot(x.cast<cplx>(), xi));
  if (!cgo_) return {e, kI * xi * e};
  const ValueGradient phi = eval_phi(*cgo_, x);
  return {e * (1.0 + phi.value), e * (kI * xi * (1.0 + phi.value) + phi.gradient)};
}

PairingValue boundary_pairing(const CauchyData& data, const TestSolution& v) {
  const MeasurementSphere& s = data.sphere;
  std::vector<cplx> terms(s.size());
  parallel_for(s.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const ValueGradient vg = v.eval(s.points()[i]);
      const cplx dnv = bilinear_dot(vg.gradient, s.normals()[i].cast<cplx>());
      terms[i] = s.weights()[i] * (data.dnu[i] * vg.value - data.u[i] * dnv);
    }
  });
  cplx full = 0.0, half = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    full += terms[i];
    if ((i % static_cast<std::size_t>(s.n_phi())) % 2 == 0) half += 2.0 * terms[i];
  }
  return {v.parameter(), full, std::abs(full - half)};
}

RecoveryConstants constants_M_MG(const Medium& q, double k, const CubeGrid& grid, double C_L, double omega_radius) {
  RecoveryConstants c;
  const double R0 = grid.R0(), k2 = k * k;
  c.C_L = C_L;
  c.C_s = C_L;
  c.q_c0 = q.norms().c0;
  c.q_c2 = q.norms().c2;
  c.q_h2 = q.is_zero() ? 0.0 : q.sobolev_norm_on(grid, 2);
  // M_G(t) = A / t + B.
  const double A = ((R0 * k2 / kPi) * (4.0 * c.q_c0 + 24.0) + 13.5) * 18.0 * R0 * k2 / kPi * c.q_h2;
  const double B = 4.0 * R0 * k2 / kPi * c.q_h2;
  const double gamma = 24.0 / 11.0 * C_L;
  const double c1 = 2916.0 * R0 * k2 / kPi * c.q_h2 * c.C_s;
  const double c2 = 2.0 * R0 * k2 / kPi * c.q_c2;
  const double c4 = kPi / R0;
  const double c5 = k;
  const double m0 = std::max({c1, c2, c4, c5});
  const double fixed = 0.5 * (gamma * B + std::sqrt(gamma * gamma * B * B + 4.0 * gamma * A));
  c.M = std::max(m0, fixed);
  c.M_G = cgo_MG(c.q_c0, c.q_h2, k, R0, c.M);
  c.candidates = {c1, c2, gamma * c.M_G, c4, c5};
  const double spread = std::sqrt(c.M * c.M + 4.0 * c.M_G * c.M_G * C_L * C_L);
  const double log_area = std::log(4.0 * kPi * omega_radius * omega_radius);
  c.log_C_a = std::log(2.0) + 7.0 * spread * R0 + 0.5 * log_area;
  c.log_C_z = c.M_G > 0.0 ? -std::log(c.M_G * C_L) + std::log(4.0) + 11.0 * spread * R0 + 0.5 * log_area : INFINITY;
  return c;
}

Mat3 separation_frame(const Vec3& z1, const Vec3& z2) {
  const Vec3 d = z1 - z2;
  if (!(d.norm() > 0.0)) throw DegenerateInputError("separation frame: z1 and z2 coincide");
  const Vec3 e2 = d.normalized();
  int axis = 0;
  e2.cwiseAbs().minCoeff(&axis);
  const Vec3 e0 = Vec3::Unit(axis);
  const Vec3 e3 = e0.cross(e2).normalized();
  const Vec3 e1 = e3.cross(e2);
  Mat3 F;
  F << e1, e2, e3;
  return F;
}

namespace {

// ln|v(z)| for v = exp(i z.xi)(1 + phi), without forming the exponential.
double log_abs_v(const CgoSolution& sol, const Vec3& z) {
  const cplx phase = kI * bilinear_dot(z.cast<cplx>(), sol.parameter.xi());
  return phase.real() + std::log(std::abs(1.0 + eval_phi(sol, z).value));
}

}  // namespace

AmplitudeXi select_xi_amplitude(const Vec3& z1, const Vec3& z2, const RecoveryConstants& c, const Medium& q, double k,
                                const CubeGrid& grid, const CgoOptions& opts) {
  const Mat3 F = separation_frame(z1, z2);
  AmplitudeXi out;
  auto param = [&](double t2) { return CgoParameter(F.col(0), F.col(1), F.col(2), c.M, t2, k); };
  auto g = [&](double t2) {
    ++out.evaluations;
    const CgoSolution sol = build_cgo(q, param(t2), grid, opts);
    return log_abs_v(sol, z1) - log_abs_v(sol, z2);
  };
  double b = 2.0 * c.M_G * c.C_L;
  if (q.is_zero() || b == 0.0) {
    out.xi = param(0.0);
    out.log_ratio = g(0.0);
    return out;
  }
  double lo = -b, hi = b;
  double glo = g(lo), ghi = g(hi);
  if (!(glo > 0.0 && ghi < 0.0)) {
    lo = -2.0 * b;
    hi = 2.0 * b;
    glo = g(lo);
    ghi = g(hi);
    if (!(glo > 0.0 && ghi < 0.0))
      throw SolverError("select_xi_amplitude: no sign change on the widened bracket", std::min(std::abs(glo), std::abs(ghi)),
                        out.evaluations);
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm > 0.0) lo = mid; else hi = mid;
  }
  out.t2 = 0.5 * (lo + hi);
  out.xi = param(out.t2);
  out.log_ratio = g(out.t2);
  return out;
}

CgoParameter select_xi_location(const Vec3& z1, const Vec3& z2, double M, double k) {
  const Mat3 F = separation_frame(z1, z2);
  return CgoParameter(F.col(0), F.col(1), F.col(2), M, M, k);
}

AmplitudeCertificate amplitude_certificate(const CauchyData& d1, const CauchyData& d2, double a1, double a2,
                                           const Vec3& z1, const AmplitudeXi& xi, const Medium& q,
                                           const CubeGrid& grid, const CgoOptions& opts) {
  auto sol = std::make_shared<const CgoSolution>(build_cgo(q, xi.xi, grid, opts));
  const PairingValue P = boundary_pairing(d1 - d2, TestSolution::cgo(sol));
  const double log_v = log_abs_v(*sol, z1);
  const double rho = d1.sphere.radius();
  AmplitudeCertificate c;
  c.lhs = std::abs(a1 - a2);
  c.pairing_bound = std::exp(std::log(std::abs(P.value)) - log_v);
  c.log_rhs = std::log(std::abs(P.value)) + 5.0 * grid.R0() * xi.xi.imag_norm() +
              0.5 * std::log(4.0 * kPi * rho * rho) - log_v;
  return c;
}

LocationCertificate location_certificate(const Vec3& z1, const Vec3& z2, const RecoveryConstants& c, const Medium& q,
                                         double k, const CubeGrid& grid, const CgoOptions& opts) {
  auto sol = std::make_shared<const CgoSolution>(build_cgo(q, select_xi_location(z1, z2, c.M, k), grid, opts));
  const TestSolution v = TestSolution::cgo(sol);
  const double dz = (z1 - z2).norm();
  const double decay = std::exp(-2.0 * c.M * grid.R0());
  LocationCertificate out;
  out.lhs = std::abs((v.value(z1) - v.value(z2)).real());
  out.rhs = c.M_G * c.C_L * dz * decay;
  out.rhs_q0 = 11.0 / 12.0 * c.M * dz * decay;
  return out;
}

Vec3 SearchGrid::point(int i, int j, int l) const {
  const double h = spacing();
  return Vec3(-half_width + i * h, -half_width + j * h, -half_width + l * h);
}

std::vector<Vec3> fibonacci_directions(int count) {
  if (count < 1) throw DomainError("fibonacci_directions: count must be positive");
  std::vector<Vec3> d(count);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int j = 0; j < count; ++j) {
    const double z = 1.0 - (2.0 * j + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    d[j] = Vec3(r * std::cos(golden * j), r * std::sin(golden * j), z);
  }
  return d;
}

int auto_direction_count(double k, double radius) {
  const double kd = 2.0 * k * radius;
  return std::max(64, static_cast<int>(std::ceil(1.5 * kd * kd)));
}

namespace {

// Plane-wave pairings and quadrature for the backprojection sum.
struct Backprojector {
  std::vector<Vec3> dirs;
  std::vector<cplx> P;
  double weight = 0.0;
  double k = 0.0;

  Backprojector(const CauchyData& data, double k_, double radius, int n) : k(k_) {
    if (n == 0) n = auto_direction_count(k, radius);
    if (n < 20) throw DomainError("imaging_functional: at least 20 directions are required");
    dirs = fibonacci_directions(n);
    weight = 4.0 * kPi / n;
    P.resize(dirs.size());
    for (std::size_t j = 0; j < dirs.size(); ++j)
      P[j] = boundary_pairing(data, TestSolution::plane_wave(plane_wave_parameter(dirs[j], k))).value;
  }

  // B(z) = sum_j w P_j exp(-i k z.d_j) on the whole lattice; per-axis phase tables keep it cheap.
  std::vector<cplx> evaluate(const SearchGrid& g) const {
    const int n = g.n;
    std::vector<cplx> out(static_cast<std::size_t>(n) * n * n, 0.0);
    const double h = g.spacing();
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      const cplx c = weight * P[j] * std::exp(-kI * k * (-g.half_width) * (dirs[j](0) + dirs[j](1) + dirs[j](2)));
      std::vector<cplx> t[3];
      for (int a = 0; a < 3; ++a) {
        t[a].resize(n);
        const cplx step = std::exp(-kI * k * h * dirs[j](a));
        cplx v = 1.0;
        for (int i = 0; i < n; ++i, v *= step) t[a][i] = v;
      }
      parallel_for(static_cast<std::size_t>(n), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const cplx ci = c * t[0][i];
          for (int jj = 0; jj < n; ++jj) {
            const cplx cij = ci * t[1][jj];
            cplx* row = &out[(i * n + jj) * n];
            for (int l = 0; l < n; ++l) row[l] += cij * t[2][l];
          }
        }
      });
    }
    return out;
  }
};

}  // namespace

HeatMap imaging_functional(const CauchyData& data, double k, const SearchGrid& grid, int n_directions) {
  const Backprojector bp(data, k, grid.ball_radius, n_directions);
  const std::vector<cplx> B = bp.evaluate(grid);
  HeatMap map;
  map.grid = grid;
  const int n = grid.n;
  map.points.resize(B.size());
  map.values.assign(B.size(), -1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const std::size_t p = (static_cast<std::size_t>(i) * n + j) * n + l;
        map.points[p] = grid.point(i, j, l);
        if (map.points[p].norm() <= grid.ball_radius) map.values[p] = std::abs(B[p]);
      }
  map.argmax = static_cast<std::size_t>(std::max_element(map.values.begin(), map.values.end()) - map.values.begin());
  return map;
}

std::vector<std::size_t> extract_peaks(const HeatMap& map, double exclusion, double fraction) {
  const int n = map.grid.n;
  const double top = map.values[map.argmax];
  if (!(top > 0.0)) return {};
  auto idx = [n](int i, int j, int l) { return (static_cast<std::size_t>(i) * n + j) * n + l; };
  std::vector<std::size_t> maxima;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const double v = map.values[idx(i, j, l)];
        if (v < fraction * top) continue;
        bool is_max = true;
        for (int di = -1; di <= 1 && is_max; ++di)
          for (int dj = -1; dj <= 1 && is_max; ++dj)
            for (int dl = -1; dl <= 1 && is_max; ++dl) {
              const int a = i + di, b = j + dj, c = l + dl;
              if ((di || dj || dl) && a >= 0 && b >= 0 && c >= 0 && a < n && b < n && c < n)
                is_max = map.values[idx(a, b, c)] <= v;
            }
        if (is_max) maxima.push_back(idx(i, j, l));
      }
  // Strongest first; ties broken lexicographically on the coordinates.
  std::sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) {
    if (map.values[a] != map.values[b]) return map.values[a] > map.values[b];
    const Vec3 &pa = map.points[a], &pb = map.points[b];
    return std::lexicographical_compare(pa.data(), pa.data() + 3, pb.data(), pb.data() + 3);
  });
  std::vector<std::size_t> peaks;
  for (std::size_t m : maxima) {
    bool far = true;
    for (std::size_t p : peaks) far = far && (map.points[m] - map.points[p]).norm() > exclusion;
    if (far) peaks.push_back(m);
  }
  return peaks;
}

std::vector<CgoParameter> recovery_family(double k, const RecoveryOptions& opts, bool medium_present) {
  std::vector<CgoParameter> fam;
  const double t_real = medium_present ? opts.t_floor : 0.0;
  for (const Vec3& d : fibonacci_directions(opts.n_real)) {
    const Mat3 T = triad_from(d);
    fam.emplace_back(T.col(0), T.col(1), T.col(2), t_real, 0.0, k);
  }
  if (opts.n_complex > 0) {
    for (const Vec3& d : fibonacci_directions(opts.n_complex + 1)) {
      if (static_cast<int>(fam.size()) >= opts.n_real + opts.n_complex) break;
      const Mat3 T = triad_from(Vec3(d(1), d(2), d(0)));
      fam.emplace_back(T.col(0), T.col(1), T.col(2), opts.t_complex, 0.0, k);
    }
  }
  return fam;
}

std::vector<TestSolution> build_tests(const Medium& q, double k, const RecoveryOptions& opts, int extra_real) {
  RecoveryOptions o = opts;
  o.n_real += extra_real;
  const std::vector<CgoParameter> fam = recovery_family(k, o, !q.is_zero());
  std::vector<TestSolution> tests;
  tests.reserve(fam.size());
  if (q.is_zero()) {
    for (const auto& xi : fam) tests.push_back(TestSolution::plane_wave(xi));
    return tests;
  }
  const CubeGrid grid(opts.cgo_R0, opts.cgo_n);
  for (const auto& xi : fam) tests.push_back(TestSolution::cgo(std::make_shared<const CgoSolution>(build_cgo(q, xi, grid, opts.cgo))));
  return tests;
}

PairedFamily pair_family(const CauchyData& data, const std::vector<TestSolution>& tests) {
  PairedFamily fam;
  fam.tests = tests;
  for (const auto& t : tests) fam.pairings.push_back(boundary_pairing(data, t).value);
  return fam;
}

PairedFamily pair_family(const CauchyData& data, const Medium& q, double k, const RecoveryOptions& opts) {
  return pair_family(data, build_tests(q, k, opts));
}

namespace {

// Stacked residual [Re r; Im r] with r_j = P_j - sum_i a_i v_j(z_i); empty if a location
// leaves the domain of a test solution.
bool residual(const PairedFamily& fam, const std::vector<SourceFit>& s, double max_radius, Eigen::VectorXd& r,
              Eigen::MatrixXd* J) {
  const std::size_t m = fam.tests.size();
  if (max_radius > 0.0)
    for (const auto& src : s)
      if (src.location.norm() >= max_radius) return false;
  r.resize(2 * m);
  if (J) J->setZero(2 * m, 5 * s.size());
  try {
    for (std::size_t j = 0; j < m; ++j) {
      cplx model = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const ValueGradient vg = fam.tests[j].eval(s[i].location);
        model += s[i].amplitude * vg.value;
        if (J) {
          const cplx cols[5] = {-vg.value, -kI * vg.value, -s[i].amplitude * vg.gradient(0),
                                -s[i].amplitude * vg.gradient(1), -s[i].amplitude * vg.gradient(2)};
          for (int c = 0; c < 5; ++c) {
            (*J)(j, 5 * i + c) = cols[c].real();
            (*J)(m + j, 5 * i + c) = cols[c].imag();
          }
        }
      }
      const cplx rj = fam.pairings[j] - model;
      r(j) = rj.real();
      r(m + j) = rj.imag();
    }
  } catch (const DomainError&) {
    return false;
  }
  return true;
}

std::vector<SourceFit> moved(const std::vector<SourceFit>& s, const Eigen::VectorXd& step, double scale) {
  std::vector<SourceFit> out = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i].amplitude += scale * cplx(step(5 * i), step(5 * i + 1));
    out[i].location += scale * step.segment<3>(5 * i + 2);
  }
  return out;
}

// Complex least-squares amplitudes at fixed locations.
std::vector<cplx> linear_amplitudes(const PairedFamily& fam, const std::vector<Vec3>& z) {
  const std::size_t m = fam.tests.size();
  Eigen::MatrixXcd V(m, z.size());
  Eigen::VectorXcd P(m);
  for (std::size_t j = 0; j < m; ++j) {
    P(j) = fam.pairings[j];
    for (std::size_t i = 0; i < z.size(); ++i) V(j, i) = fam.tests[j].value(z[i]);
  }
  const Eigen::VectorXcd a = V.colPivHouseholderQr().solve(P);
  return std::vector<cplx>(a.data(), a.data() + a.size());
}

}  // namespace

MultiSourceFit fit_sources(const PairedFamily& fam, const std::vector<SourceFit>& init, const RecoveryOptions& opts) {
  MultiSourceFit out;
  out.sources = init;
  if (init.empty()) return out;
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  if (!residual(fam, out.sources, opts.max_radius, r, &J)) throw DomainError("fit_sources: initial location outside the test domain");
  double cost = r.squaredNorm();
  int increases = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    out.iterations = it;
    const Eigen::VectorXd step = J.colPivHouseholderQr().solve(-r);
    if (!step.allFinite()) break;
    const double size = step.norm();
    bool accepted = false;
    Eigen::VectorXd r_try;
    for (double scale = 1.0; scale > 1e-3; scale *= 0.5) {
      const auto trial = moved(out.sources, step, scale);
      if (residual(fam, trial, opts.max_radius, r_try, nullptr) && r_try.squaredNorm() <= cost) {
        out.sources = trial;
        cost = r_try.squaredNorm();
        accepted = true;
        break;
      }
    }
    if (size < opts.step_tol) {
      out.converged = true;
      break;
    }
    if (!accepted) {
      // Rounding-level steps that cannot lower the cost mark the minimum.
      double scale_ref = 1.0;
      for (const auto& s : out.sources) scale_ref = std::max({scale_ref, std::abs(s.amplitude), s.location.norm()});
      if (size < 1e-7 * scale_ref) {
        out.converged = true;
        break;
      }
      const auto trial = moved(out.sources, step, 1.0);
      if (!residual(fam, trial, opts.max_radius, r_try, nullptr) || ++increases >= 5)
        throw SolverError("fit_sources: residual increased on five consecutive steps", std::sqrt(cost), it);
      out.sources = trial;
      cost = r_try.squaredNorm();
    } else {
      increases = 0;
    }
    residual(fam, out.sources, opts.max_radius, r, &J);
  }
  residual(fam, out.sources, opts.max_radius, r, nullptr);
  out.residual = r.norm();
  return out;
}

std::vector<Vec3> clean_peaks(const CauchyData& data, double k, const SearchGrid& grid, int n_directions,
                              double exclusion, double fraction, int max_peaks) {
  Backprojector bp(data, k, grid.ball_radius, n_directions);
  const int n = grid.n;
  std::vector<Vec3> pts(static_cast<std::size_t>(n) * n * n);
  std::vector<bool> open(pts.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const std::size_t p = (static_cast<std::size_t>(i) * n + j) * n + l;
        pts[p] = grid.point(i, j, l);
        open[p] = pts[p].norm() <= grid.ball_radius;
      }
  PairedFamily plane;
  plane.pairings = bp.P;
  for (const Vec3& d : bp.dirs) plane.tests.push_back(TestSolution::plane_wave(plane_wave_parameter(d, k)));
  RecoveryOptions refine;
  refine.max_radius = grid.ball_radius * (1.0 + 1e-9);
  refine.max_iter = 50;
  std::vector<Vec3> peaks;
  double first = -1.0;
  while (static_cast<int>(peaks.size()) <= max_peaks) {
    const std::vector<cplx> B = bp.evaluate(grid);
    std::size_t best = pts.size();
    for (std::size_t p = 0; p < pts.size(); ++p) {
      if (!open[p]) continue;
      if (best == pts.size() || std::abs(B[p]) > std::abs(B[best])) best = p;
    }
    if (best == pts.size()) break;
    const double v = std::abs(B[best]);
    if (first < 0.0) first = v;
    if (!(v > 0.0) || v < fraction * first) break;
    peaks.push_back(pts[best]);
    // Joint refinement of all peaks against the original pairings; the lattice points are kept
    // when the fit fails. The backprojection of the remainder is searched next.
    std::vector<SourceFit> init;
    for (const cplx& a : linear_amplitudes(plane, peaks)) init.push_back({a, peaks[init.size()]});
    try {
      const MultiSourceFit f = fit_sources(plane, init, refine);
      for (std::size_t i = 0; i < peaks.size(); ++i) {
        init[i] = f.sources[i];
        peaks[i] = f.sources[i].location;
      }
    } catch (const Error&) {
    }
    for (std::size_t j = 0; j < bp.dirs.size(); ++j) {
      bp.P[j] = plane.pairings[j];
      for (const auto& s : init) bp.P[j] -= s.amplitude * plane.tests[j].value(s.location);
    }
    for (std::size_t p = 0; p < pts.size(); ++p)
      for (const Vec3& z : peaks)
        if ((pts[p] - z).norm() <= exclusion) open[p] = false;
  }
  return peaks;
}

SingleSourceFit fit_single_source(const PairedFamily& fam, const Vec3& init_z, const RecoveryOptions& opts) {
  SingleSourceFit out;
  const cplx a0 = linear_amplitudes(fam, {init_z})[0];
  out.location = init_z;
  if (std::abs(a0) <= opts.degenerate_amplitude) {
    out.amplitude = a0;
    out.amplitude_degenerate = true;
    out.converged = true;
    Eigen::VectorXd r;
    residual(fam, {SourceFit{a0, init_z}}, 0.0, r, nullptr);
    out.residual = r.norm();
    return out;
  }
  const MultiSourceFit f = fit_sources(fam, {SourceFit{a0, init_z}}, opts);
  out.amplitude = f.sources[0].amplitude;
  out.location = f.sources[0].location;
  out.residual = f.residual;
  out.iterations = f.iterations;
  out.converged = f.converged;
  out.amplitude_degenerate = std::abs(out.amplitude) <= opts.degenerate_amplitude;
  return out;
}

SingleSourceFit recover_single_source(const CauchyData& data, const Medium& q, double k, const Vec3& init_z,
                                      const RecoveryOptions& opts) {
  if (init_z.norm() >= data.sphere.radius()) throw DomainError("recover_single_source: initial guess outside Omega");
  RecoveryOptions o = opts;
  if (o.max_radius <= 0.0) o.max_radius = data.sphere.radius();
  return fit_single_source(pair_family(data, q, k, o), init_z, o);
}

RecoveryResult recover_multi_source(const CauchyData& data, const Medium& q, double k, double eta,
                                    const MultiRecoveryOptions& opts) {
  if (!(eta > 0.0)) throw DomainError("recover_multi_source: eta must be positive");
  RecoveryResult out;
  out.recovered.eta = eta;
  out.recovered.N0 = opts.N0;
  out.peaks = clean_peaks(data, k, opts.search, opts.n_directions, 6.0 * eta, opts.peak_fraction, opts.N0);
  if (out.peaks.empty()) return out;
  if (static_cast<int>(out.peaks.size()) > opts.N0)
    throw ModelOrderError("recover_multi_source: more than N0 = " + std::to_string(opts.N0) + " imaging peaks");
  RecoveryOptions fit_opts = opts.fit;
  if (fit_opts.max_radius <= 0.0) fit_opts.max_radius = data.sphere.radius();

  const int extra = std::max(0, 8 * static_cast<int>(out.peaks.size()) - opts.fit.n_real);
  const PairedFamily fam = pair_family(data, build_tests(q, k, opts.fit, extra));
  std::vector<SourceFit> current;
  const std::vector<cplx> a0 = linear_amplitudes(fam, out.peaks);
  for (std::size_t i = 0; i < a0.size(); ++i) current.push_back({a0[i], out.peaks[i]});

  MultiSourceFit fit;
  // Each pass either keeps every source or drops at least one, so this terminates.
  for (;;) {
    fit = fit_sources(fam, current, fit_opts);
    double top = 0.0;
    for (const auto& s : fit.sources) top = std::max(top, std::abs(s.amplitude));
    std::vector<SourceFit> kept;
    for (const auto& s : fit.sources)
      if (std::abs(s.amplitude) >= opts.peak_fraction * top && std::abs(s.amplitude) > opts.fit.degenerate_amplitude)
        kept.push_back(s);
    if (kept.size() == fit.sources.size()) break;
    current = kept;
    if (current.empty()) {
      fit.sources.clear();
      break;
    }
  }
  out.fits = fit.sources;
  std::sort(out.fits.begin(), out.fits.end(), [](const SourceFit& a, const SourceFit& b) {
    if (std::abs(a.amplitude) != std::abs(b.amplitude)) return std::abs(a.amplitude) > std::abs(b.amplitude);
    return std::lexicographical_compare(a.location.data(), a.location.data() + 3, b.location.data(), b.location.data() + 3);
  });
  for (const auto& s : out.fits) out.recovered.sources.push_back({s.amplitude.real(), s.location});
  out.residual = fit.residual;
  out.iterations = fit.iterations;
  out.admissible = check_admissible(out.recovered, data.sphere.radius()).admissible;
  return out;
}

Matching match_sources(const PointSourceSet& S1, const PointSourceSet& S2, double eta) {
  Matching m;
  m.pi.assign(S1.size(), -1);
  std::vector<bool> used(S2.size(), false);
  for (std::size_t j = 0; j < S1.size(); ++j) {
    int best = -1;
    double best_d = 3.0 * eta;
    for (std::size_t i = 0; i < S2.size(); ++i) {
      const double d = (S1.sources[j].location - S2.sources[i].location).norm();
      if (!used[i] && d < best_d) {
        best = static_cast<int>(i);
        best_d = d;
      }
    }
    if (best >= 0) {
      m.pi[j] = best;
      used[best] = true;
      m.matched.push_back(static_cast<int>(j));
    } else {
      m.only_1.push_back(static_cast<int>(j));
    }
  }
  for (std::size_t i = 0; i < S2.size(); ++i)
    if (!used[i]) m.only_2.push_back(static_cast<int>(i));
  return m;
}

}  // namespace hsl
