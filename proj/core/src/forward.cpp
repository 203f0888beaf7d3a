#include "hsl/forward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hsl/fft.hpp"
#include "hsl/krylov.hpp"
#include "hsl/parallel.hpp"
#include "hsl/rng.hpp"

namespace hsl {

VolumeLattice::VolumeLattice(double half_side_, int n_) : half_side(half_side_), n(n_) {
  if (!(half_side_ > 0.0)) throw DomainError("VolumeLattice: half side must be positive");
  if (n_ < 8 || n_ % 2 != 0) throw DomainError("VolumeLattice: n must be even and >= 8");
}

Vec3 VolumeLattice::node(std::size_t flat) const {
  const auto nn = static_cast<std::size_t>(n);
  return {coordinate(static_cast<int>(flat / (nn * nn))), coordinate(static_cast<int>((flat / nn) % nn)),
          coordinate(static_cast<int>(flat % nn))};
}

VolumeLattice lattice_for(double omega_radius, int n) { return VolumeLattice(1.1 * omega_radius, n); }

namespace {

int smooth_size(int target) {
  for (int m = std::max(target, 8);; ++m) {
    if (m % 2 != 0) continue;
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

// (exp(i d L) - 1) / d, continuous at d = 0.
cplx phase_quotient(double d, double L) {
  const double x = d * L;
  if (std::abs(x) < 1e-3) return kI * L * (1.0 + kI * x / 2.0 - x * x / 6.0 - kI * x * x * x / 24.0);
  return (std::polar(1.0, x) - 1.0) / d;
}

}  // namespace

cplx VolumePotential::truncated_kernel(double kappa, double k, double L) {
  if (kappa < 1e-12) {
    if (k == 0.0) return 0.5 * L * L;
    return std::polar(1.0, k * L) * (L / (kI * k) + 1.0 / (k * k)) - 1.0 / (k * k);
  }
  const cplx integral = -0.5 * (phase_quotient(k + kappa, L) - phase_quotient(k - kappa, L));
  return integral / kappa;
}

VolumePotential::VolumePotential(const VolumeLattice& lattice, double k) : lattice_(lattice), k_(k) {
  const double h = lattice.spacing();
  const double side = 2.0 * lattice.half_side;
  const double L = std::sqrt(3.0) * side;
  m_ = smooth_size(static_cast<int>(std::ceil((side + L) / h)) + 1);
  period_ = m_ * h;
  kernel_.resize(static_cast<std::size_t>(m_) * m_ * m_);
  const double scale = k * k * h * h * h / (period_ * period_ * period_);
  const double dk = 2.0 * kPi / period_;
  const int m = m_;
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t b, std::size_t e) {
    for (std::size_t a = b; a < e; ++a) {
      const int ma = static_cast<int>(a) < m / 2 ? static_cast<int>(a) : static_cast<int>(a) - m;
      for (int bb = 0; bb < m; ++bb) {
        const int mb = bb < m / 2 ? bb : bb - m;
        for (int c = 0; c < m; ++c) {
          const int mc = c < m / 2 ? c : c - m;
          const double kappa = dk * std::sqrt(double(ma) * ma + double(mb) * mb + double(mc) * mc);
          kernel_[(a * m + bb) * m + c] = scale * truncated_kernel(kappa, k, L);
        }
      }
    }
  });
}

std::vector<cplx> VolumePotential::spectrum(const std::vector<cplx>& g) const {
  const int n = lattice_.n, m = m_;
  if (g.size() != lattice_.size()) throw DomainError("VolumePotential: field size does not match the lattice");
  std::vector<cplx> pad(static_cast<std::size_t>(m) * m * m, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      std::copy_n(&g[lattice_.index(i, j, 0)], n, &pad[(static_cast<std::size_t>(i) * m + j) * m]);
  fft3d(pad, m, FftSign::kForward);
  for (std::size_t p = 0; p < pad.size(); ++p) pad[p] *= kernel_[p];
  return pad;
}

std::vector<cplx> VolumePotential::crop(std::vector<cplx>& padded) const {
  const int n = lattice_.n, m = m_;
  fft3d(padded, m, FftSign::kBackward);
  std::vector<cplx> out(lattice_.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      std::copy_n(&padded[(static_cast<std::size_t>(i) * m + j) * m], n, &out[lattice_.index(i, j, 0)]);
  return out;
}

std::vector<cplx> VolumePotential::apply(const std::vector<cplx>& g) const {
  if (k_ == 0.0) return std::vector<cplx>(g.size(), 0.0);
  std::vector<cplx> s = spectrum(g);
  return crop(s);
}

std::vector<std::vector<cplx>> VolumePotential::apply_with_derivatives(const std::vector<cplx>& g, int order) const {
  if (order < 0 || order > 2) throw DomainError("apply_with_derivatives: order must be 0, 1 or 2");
  const std::vector<cplx> s = spectrum(g);
  const int m = m_;
  const double dk = 2.0 * kPi / period_;
  auto wavenumber = [&](int slot) { return dk * (slot < m / 2 ? slot : slot - m); };
  static const int pairs[9][2] = {{-1, -1}, {0, -1}, {1, -1}, {2, -1}, {0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}};
  const int count = order == 0 ? 1 : order == 1 ? 4 : 10;
  std::vector<std::vector<cplx>> out;
  for (int f = 0; f < count; ++f) {
    const int a = f < 9 ? pairs[f][0] : 1;
    const int b = f < 9 ? pairs[f][1] : 2;
    std::vector<cplx> d(s);
    if (a >= 0) {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int l = 0; l < m; ++l) {
            const double kv[3] = {wavenumber(i), wavenumber(j), wavenumber(l)};
            cplx mult = kI * kv[a];
            if (b >= 0) mult *= kI * kv[b];
            d[(static_cast<std::size_t>(i) * m + j) * m + l] *= mult;
          }
    }
    out.push_back(crop(d));
  }
  return out;
}

std::vector<cplx> apply_Vq(const std::vector<cplx>& phi, const Medium& q, double k, const VolumeLattice& lattice) {
  if (q.is_zero()) return std::vector<cplx>(phi.size(), 0.0);
  std::vector<cplx> g(phi.size());
  for (std::size_t p = 0; p < g.size(); ++p) g[p] = q.value(lattice.node(p)) * phi[p];
  return VolumePotential(lattice, k).apply(g);
}

namespace {

// Mean of 1/|x| over the unit cube centred at the origin.
constexpr double kCubeMeanInverseDistance = 2.3800772;

cplx incident_at_node(const FieldSolution& sol, const Vec3& x, double h) {
  if (sol.incident.value) return sol.incident.value(x);
  cplx u = 0.0;
  for (const auto& s : sol.sources.sources) {
    const double r = (x - s.location).norm();
    if (r < 1e-9 * h)
      u -= s.amplitude * kCubeMeanInverseDistance / (4.0 * kPi * h);
    else
      u -= s.amplitude * green_free(x, s.location, sol.k);
  }
  return u;
}

void solve_lippmann_schwinger(FieldSolution& sol, const ForwardOptions& opts) {
  const VolumeLattice& lat = sol.lattice;
  const std::size_t N = lat.size();
  sol.w.assign(N, 0.0);
  sol.density.assign(N, 0.0);
  sol.support.clear();
  if (sol.medium.is_zero() || sol.k == 0.0) return;
  if (sol.medium.support_radius() >= opts.omega_radius)
    throw DomainError("solve_forward: supp q must lie inside the measurement ball");

  const double h = lat.spacing();
  std::vector<double> qn(N);
  std::vector<cplx> u_inc(N, 0.0);
  for (std::size_t p = 0; p < N; ++p) {
    const Vec3 x = lat.node(p);
    qn[p] = sol.medium.value(x);
    if (qn[p] != 0.0) {
      sol.support.push_back(p);
      u_inc[p] = incident_at_node(sol, x, h);
    }
  }
  const VolumePotential V(lat, sol.k);
  auto Vq = [&](const Eigen::VectorXcd& v) {
    std::vector<cplx> g(N);
    for (std::size_t p = 0; p < N; ++p) g[p] = qn[p] * v(static_cast<Eigen::Index>(p));
    const std::vector<cplx> r = V.apply(g);
    return Eigen::VectorXcd(Eigen::Map<const Eigen::VectorXcd>(r.data(), static_cast<Eigen::Index>(N)));
  };
  const Eigen::VectorXcd b = Vq(Eigen::Map<const Eigen::VectorXcd>(u_inc.data(), static_cast<Eigen::Index>(N)));
  const double bnorm = b.norm();
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(N));
  if (bnorm > 0.0) {
    if (opts.solver == ForwardSolverKind::kNeumann) {
      x = b;
      double rel = INFINITY;
      int it = 0;
      while (it < opts.max_iter) {
        ++it;
        Eigen::VectorXcd next = b + Vq(x);
        rel = (next - x).norm() / bnorm;
        x = std::move(next);
        if (rel <= opts.tol || !std::isfinite(rel)) break;
      }
      sol.iterations = it;
      sol.residual = rel;
      if (!(rel <= opts.tol)) throw SolverError("solve_forward: Neumann series did not converge", rel, it);
    } else {
      GmresOptions go;
      go.tol = opts.tol;
      go.max_iter = opts.max_iter;
      go.restart = opts.restart;
      const GmresResult r = gmres([&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return v - Vq(v); }, b, x, go);
      sol.iterations = r.iterations;
      sol.residual = r.relative_residual;
      if (!r.converged) throw SolverError("solve_forward: GMRES did not converge", r.relative_residual, r.iterations);
    }
  }
  for (std::size_t p = 0; p < N; ++p) {
    sol.w[p] = x(static_cast<Eigen::Index>(p));
    sol.density[p] = qn[p] * (u_inc[p] + sol.w[p]);
  }
}

}  // namespace

FieldSolution solve_forward(const PointSourceSet& S, const Medium& q, double k, const ForwardOptions& opts) {
  if (opts.check_admissibility) {
    const AdmissibilityReport rep = check_admissible(S, opts.omega_radius);
    if (!rep) {
      std::ostringstream os;
      os << "solve_forward: inadmissible source set";
      for (const auto& v : rep.violations) os << "; " << v;
      throw DomainError(os.str());
    }
  }
  FieldSolution sol;
  sol.sources = S;
  sol.medium = q;
  sol.k = k;
  sol.lattice = lattice_for(opts.omega_radius, opts.n);
  solve_lippmann_schwinger(sol, opts);
  return sol;
}

FieldSolution solve_scattering(const IncidentField& inc, const Medium& q, double k, const ForwardOptions& opts) {
  if (!inc.value || !inc.gradient) throw DomainError("solve_scattering: incident field needs value and gradient");
  FieldSolution sol;
  sol.medium = q;
  sol.k = k;
  sol.incident = inc;
  sol.lattice = lattice_for(opts.omega_radius, opts.n);
  solve_lippmann_schwinger(sol, opts);
  return sol;
}

cplx FieldSolution::eval_w(const Vec3& x) const {
  cplx sum = 0.0;
  for (std::size_t p : support) {
    const Vec3 y = lattice.node(p);
    if ((x - y).squaredNorm() == 0.0) continue;
    sum += green_free(x, y, k) * density[p];
  }
  return k * k * lattice.cell_volume() * sum;
}

CVec3 FieldSolution::eval_grad_w(const Vec3& x) const {
  CVec3 sum = CVec3::Zero();
  for (std::size_t p : support) {
    const Vec3 y = lattice.node(p);
    if ((x - y).squaredNorm() == 0.0) continue;
    sum += green_gradient(x, y, k) * density[p];
  }
  return k * k * lattice.cell_volume() * sum;
}

cplx FieldSolution::eval_u(const Vec3& x) const {
  const cplx base = incident.value ? incident.value(x) : eval_u0(sources, k, x);
  return base + eval_w(x);
}

CVec3 FieldSolution::eval_grad_u(const Vec3& x) const {
  const CVec3 base = incident.gradient ? incident.gradient(x) : eval_grad_u0(sources, k, x);
  return base + eval_grad_w(x);
}

std::vector<std::vector<cplx>> FieldSolution::lattice_fields(int order) const {
  if (support.empty()) {
    const int count = order == 0 ? 1 : order == 1 ? 4 : 10;
    return std::vector<std::vector<cplx>>(count, std::vector<cplx>(lattice.size(), 0.0));
  }
  return VolumePotential(lattice, k).apply_with_derivatives(density, order);
}

CauchyData extract_cauchy(const FieldSolution& sol, const MeasurementSphere& sphere) {
  const double rho = sphere.radius();
  const double margin = 2.0 * sol.sources.eta;
  for (const auto& s : sol.sources.sources)
    if (rho - s.location.norm() < margin)
      throw DomainError("extract_cauchy: measurement sphere within 2 eta of a source");
  if (!sol.medium.is_zero() && rho - sol.medium.support_radius() < margin)
    throw DomainError("extract_cauchy: measurement sphere within 2 eta of supp q");
  CauchyData data(sphere);
  parallel_for(sphere.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Vec3& x = sphere.points()[i];
      data.u[i] = sol.eval_u(x);
      data.dnu[i] = bilinear_dot(sol.eval_grad_u(x), sphere.normals()[i].cast<cplx>());
    }
  });
  return data;
}

CauchyData operator-(const CauchyData& a, const CauchyData& b) {
  CauchyData out(a);
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] -= b.u[i];
    out.dnu[i] -= b.dnu[i];
  }
  return out;
}

CauchyData operator+(const CauchyData& a, const CauchyData& b) {
  CauchyData out(a);
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] += b.u[i];
    out.dnu[i] += b.dnu[i];
  }
  return out;
}

CauchyData operator*(double s, const CauchyData& a) {
  CauchyData out(a);
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    out.u[i] *= s;
    out.dnu[i] *= s;
  }
  return out;
}

double real_sph_harmonic(int l, int m, double theta, double phi) {
  const int am = std::abs(m);
  const double p = std::sph_legendre(static_cast<unsigned>(l), static_cast<unsigned>(am), theta);
  if (m == 0) return p;
  return std::sqrt(2.0) * p * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

namespace {

std::vector<double> harmonic_table(const MeasurementSphere& sphere, int lmax) {
  const std::size_t nh = static_cast<std::size_t>(lmax + 1) * (lmax + 1);
  std::vector<double> table(nh * sphere.size());
  for (std::size_t i = 0; i < sphere.size(); ++i) {
    std::size_t c = 0;
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m) table[c++ * sphere.size() + i] = real_sph_harmonic(l, m, sphere.theta(i), sphere.phi(i));
  }
  return table;
}

}  // namespace

int default_lmax(const MeasurementSphere& sphere) { return std::min(sphere.n_theta() - 1, (sphere.n_phi() - 1) / 2); }

std::vector<cplx> sph_coefficients(const std::vector<cplx>& values, const MeasurementSphere& sphere, int lmax) {
  if (values.size() != sphere.size()) throw DomainError("sph_coefficients: value count must match the sphere");
  const std::vector<double> table = harmonic_table(sphere, lmax);
  const std::size_t nh = static_cast<std::size_t>(lmax + 1) * (lmax + 1);
  const double r2 = sphere.radius() * sphere.radius();
  std::vector<cplx> c(nh, 0.0);
  for (std::size_t h = 0; h < nh; ++h)
    for (std::size_t i = 0; i < sphere.size(); ++i) c[h] += sphere.weights()[i] / r2 * values[i] * table[h * sphere.size() + i];
  return c;
}

double boundary_l2_norm(const std::vector<cplx>& values, const MeasurementSphere& sphere, int lmax) {
  const std::vector<cplx> c = sph_coefficients(values, sphere, lmax);
  double s = 0.0;
  for (const auto& x : c) s += std::norm(x);
  return sphere.radius() * std::sqrt(s);
}

double boundary_h1_norm(const std::vector<cplx>& values, const MeasurementSphere& sphere, int lmax) {
  const std::vector<cplx> c = sph_coefficients(values, sphere, lmax);
  const double r2 = sphere.radius() * sphere.radius();
  double s = 0.0;
  std::size_t h = 0;
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m) s += (r2 + l * (l + 1.0)) * std::norm(c[h++]);
  return std::sqrt(s);
}

double cauchy_misfit(const CauchyData& d, int lmax) {
  return boundary_h1_norm(d.u, d.sphere, lmax) + boundary_l2_norm(d.dnu, d.sphere, lmax);
}

CauchyData perturb_cauchy(const CauchyData& data, double eps, std::uint64_t seed) {
  if (!(eps >= 0.0)) throw DomainError("perturb_cauchy: eps must be nonnegative");
  if (eps == 0.0) return data;
  const MeasurementSphere& sphere = data.sphere;
  if (default_lmax(sphere) < kNoiseDegree)
    throw DomainError("perturb_cauchy: sphere quadrature too coarse for degree-8 noise");
  CounterRng rng(seed, 0x6e6f697365ULL);
  const int L = kNoiseDegree;
  const std::size_t nh = static_cast<std::size_t>(L + 1) * (L + 1);
  std::vector<cplx> cu(nh), cd(nh);
  for (auto& c : cu) c = cplx(rng.normal(), rng.normal());
  for (auto& c : cd) c = cplx(rng.normal(), rng.normal());
  const double r2 = sphere.radius() * sphere.radius();
  double h1 = 0.0, l2 = 0.0;
  std::size_t h = 0;
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m, ++h) {
      h1 += (r2 + l * (l + 1.0)) * std::norm(cu[h]);
      l2 += r2 * std::norm(cd[h]);
    }
  const double scale = eps / (std::sqrt(h1) + std::sqrt(l2));
  const std::vector<double> table = harmonic_table(sphere, L);
  CauchyData out(data);
  for (std::size_t i = 0; i < sphere.size(); ++i) {
    cplx du = 0.0, dd = 0.0;
    for (std::size_t c = 0; c < nh; ++c) {
      du += cu[c] * table[c * sphere.size() + i];
      dd += cd[c] * table[c * sphere.size() + i];
    }
    out.u[i] += scale * du;
    out.dnu[i] += scale * dd;
  }
  return out;
}

namespace {

Medium difference(const Medium& a, const Medium& b) {
  std::vector<Bump> bumps = a.bumps();
  for (Bump x : b.bumps()) {
    x.amplitude = -x.amplitude;
    bumps.push_back(x);
  }
  return Medium(std::move(bumps));
}

std::vector<Vec3> locations(const PointSourceSet& S) {
  std::vector<Vec3> out;
  for (const auto& s : S.sources) out.push_back(s.location);
  return out;
}

}  // namespace

ForwardStabilityReport forward_stability_probe(const PointSourceSet& S1, const PointSourceSet& S2, const Medium& q1,
                                               const Medium& q2, double k, double rho_excl,
                                               const ForwardOptions& opts) {
  const FieldSolution u1 = solve_forward(S1, q1, k, opts);
  const FieldSolution u2 = solve_forward(S2, q2, k, opts);
  std::vector<Vec3> pts = locations(S1);
  for (const auto& z : locations(S2)) pts.push_back(z);

  ForwardStabilityReport rep;
  const VolumeLattice& lat = u1.lattice;
  double sum = 0.0;
  for (std::size_t p = 0; p < lat.size(); ++p) {
    const Vec3 x = lat.node(p);
    if (x.norm() >= opts.omega_radius) continue;
    bool excluded = false;
    for (const auto& z : pts) excluded = excluded || (x - z).norm() <= rho_excl;
    if (excluded) continue;
    const cplx d = eval_u0(S1, k, x) - eval_u0(S2, k, x) + u1.w[p] - u2.w[p];
    sum += std::norm(d);
  }
  rep.field_difference = std::sqrt(sum * lat.cell_volume());
  rep.medium_term = difference(q1, q2).norms().c0;

  std::vector<Vec3> sing;
  for (const auto& z : pts) {
    bool dup = false;
    for (const auto& y : sing) dup = dup || (y - z).norm() == 0.0;
    if (!dup) sing.push_back(z);
  }
  const double s2 = integrate_ball(
      [&](const Vec3& x) {
        cplx d = 0.0;
        for (const auto& s : S1.sources)
          if (s.amplitude != 0.0) d -= s.amplitude * green_free(x, s.location, k);
        for (const auto& s : S2.sources)
          if (s.amplitude != 0.0) d += s.amplitude * green_free(x, s.location, k);
        return std::norm(d);
      },
      opts.omega_radius, sing);
  rep.source_term = std::sqrt(std::max(0.0, s2));
  const double denom = rep.medium_term + rep.source_term;
  rep.ratio = denom > 0.0 ? rep.field_difference / denom : 0.0;
  return rep;
}

double forward_bound_ratio(const FieldSolution& sol, double omega_radius) {
  const std::vector<Vec3> pts = locations(sol.sources);
  const double u0sq = integrate_ball([&](const Vec3& x) { return std::norm(eval_u0(sol.sources, sol.k, x)); },
                                     omega_radius, pts);
  if (u0sq <= 0.0) throw DomainError("forward_bound_ratio: u0 vanishes");
  const VolumeLattice& lat = sol.lattice;
  double extra = 0.0;
  for (std::size_t p = 0; p < lat.size(); ++p) {
    const Vec3 x = lat.node(p);
    if (x.norm() >= omega_radius || sol.w[p] == 0.0) continue;
    const cplx u0 = eval_u0(sol.sources, sol.k, x);
    extra += 2.0 * std::real(std::conj(u0) * sol.w[p]) + std::norm(sol.w[p]);
  }
  extra *= lat.cell_volume();
  return std::sqrt(std::max(0.0, u0sq + extra) / u0sq);
}

}  // namespace hsl
