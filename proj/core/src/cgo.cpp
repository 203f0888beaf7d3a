#include "hsl/cgo.hpp"

#include <algorithm>
#include <cmath>

#include "hsl/krylov.hpp"

namespace hsl {

CgoParameter::CgoParameter(const Vec3& e1_, const Vec3& e2_, const Vec3& e3_, double t1_, double t2_, double k_)
    : e1(e1_), e2(e2_), e3(e3_), t1(t1_), t2(t2_), k(k_) {
  Mat3 E;
  E << e1, e2, e3;
  if (!(E.transpose() * E - Mat3::Identity()).isZero(1e-12))
    throw DomainError("CgoParameter: triad is not orthonormal");
  if (!(k_ >= 0.0)) throw DomainError("CgoParameter: k must be nonnegative");
}

CVec3 CgoParameter::xi() const {
  const Vec3 im = t1 * e1 + t2 * e2;
  const Vec3 re = real_norm() * e3;
  CVec3 out;
  for (int a = 0; a < 3; ++a) out(a) = cplx(re(a), im(a));
  return out;
}

Mat3 CgoParameter::frame() const {
  const double t = imag_norm();
  const Vec3 f2 = t > 0.0 ? Vec3((t1 * e1 + t2 * e2) / t) : e1;
  Mat3 R;
  R.col(0) = e3;
  R.col(1) = f2;
  R.col(2) = e3.cross(f2);
  return R;
}

FaddeevParameter CgoParameter::faddeev() const { return FaddeevParameter(real_norm(), imag_norm(), frame()); }

Mat3 triad_from(const Vec3& d) {
  const Vec3 e3 = d.normalized();
  const Vec3 seed = std::abs(e3(0)) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = (seed - seed.dot(e3) * e3).normalized();
  const Vec3 e2 = e3.cross(e1);
  Mat3 T;
  T << e1, e2, e3;
  return T;
}

CgoParameter plane_wave_parameter(const Vec3& d, double k) {
  const Mat3 T = triad_from(d);
  return CgoParameter(T.col(0), T.col(1), T.col(2), 0.0, 0.0, k);
}

double contraction_certificate(const Medium& q, const CgoParameter& xi, double R0) {
  const double t = xi.imag_norm();
  const double num = 2.0 * R0 * xi.k * xi.k * q.norms().c0;
  if (num == 0.0) return 0.0;
  return t > 0.0 ? num / (kPi * t) : INFINITY;
}

namespace {

Eigen::Map<Eigen::VectorXcd> as_vector(SpectralField& F) {
  return {F.coeffs.data(), static_cast<Eigen::Index>(F.coeffs.size())};
}

}  // namespace

CgoSolution build_cgo(const Medium& q, const CgoParameter& xi, const CubeGrid& grid, const CgoOptions& opts) {
  CgoSolution sol(grid);
  sol.parameter = xi;
  sol.medium = q;
  if (q.is_zero()) {
    sol.solver_used = opts.solver == CgoSolverKind::kKrylov ? CgoSolverKind::kKrylov : CgoSolverKind::kNeumann;
    return sol;
  }
  if (!(xi.imag_norm() > 0.0)) throw DomainError("build_cgo: |Im xi| must be positive for q != 0");

  const FaddeevParameter fp = xi.faddeev();
  const Mat3& R = fp.frame;
  const double k2 = xi.k * xi.k;
  const ScalarField q_nodes = ScalarField::sample(grid, [&](const Vec3& y) { return cplx(q.value(R * y)); });
  sol.q_projected = to_spectral(q_nodes);

  {
    const ScalarField fine = resample(sol.q_projected, 2 * grid.n());
    double err = 0.0;
    for (std::size_t p = 0; p < fine.values.size(); ++p)
      err = std::max(err, std::abs(fine.values[p] - q.value(R * fine.grid.node(p))));
    sol.projection_error = err;
  }

  SpectralField b = apply_G((-k2) * sol.q_projected, fp);
  auto apply_K = [&](const SpectralField& phi) {
    ScalarField f = from_spectral(phi);
    for (std::size_t p = 0; p < f.values.size(); ++p) f.values[p] *= k2 * q_nodes.values[p];
    return apply_G(to_spectral(f), fp);
  };

  CgoSolverKind kind = opts.solver;
  if (kind == CgoSolverKind::kAuto)
    kind = contraction_certificate(q, xi, grid.R0()) <= 1.0 ? CgoSolverKind::kNeumann : CgoSolverKind::kKrylov;
  sol.solver_used = kind;
  const double bnorm = sobolev_norm(b, 0);

  if (kind == CgoSolverKind::kNeumann) {
    SpectralField phi = b;
    double rel = INFINITY;
    int it = 0;
    while (it < opts.max_neumann) {
      ++it;
      SpectralField next = b - apply_K(phi);
      rel = sobolev_norm(next - phi, 0) / bnorm;
      phi = std::move(next);
      if (rel <= opts.tol || !std::isfinite(rel)) break;
    }
    sol.phi = std::move(phi);
    sol.iterations = it;
    sol.residual_norm = rel;
    if (!(rel <= opts.tol)) throw SolverError("build_cgo: Neumann series did not converge", rel, it);
    return sol;
  }

  auto apply_A = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
    SpectralField x(grid, std::vector<cplx>(v.data(), v.data() + v.size()));
    SpectralField y = x + apply_K(x);
    return as_vector(y);
  };
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.size()));
  GmresOptions go;
  go.tol = opts.tol;
  go.max_iter = opts.max_krylov;
  const GmresResult gr = gmres(apply_A, as_vector(b), x, go);
  sol.phi = SpectralField(grid, std::vector<cplx>(x.data(), x.data() + x.size()));
  sol.iterations = gr.iterations;
  sol.residual_norm = gr.relative_residual;
  if (!gr.converged) throw SolverError("build_cgo: GMRES did not converge", gr.relative_residual, gr.iterations);
  return sol;
}

ValueGradient eval_phi(const CgoSolution& sol, const Vec3& x) {
  const Mat3 R = sol.parameter.frame();
  const Vec3 y = R.transpose() * x;
  if (!sol.phi.grid.contains(y)) throw DomainError("eval_phi: point outside the cube");
  ValueGradient vg = eval_with_gradient(sol.phi, y);
  vg.gradient = R.cast<cplx>() * vg.gradient;
  return vg;
}

cplx eval_v(const CgoSolution& sol, const Vec3& x) {
  const cplx phi = eval_phi(sol, x).value;
  const cplx phase = std::exp(kI * bilinear_dot(sol.parameter.xi(), x.cast<cplx>()));
  return phase * (1.0 + phi);
}

CVec3 eval_grad_v(const CgoSolution& sol, const Vec3& x) {
  const ValueGradient vg = eval_phi(sol, x);
  const CVec3 xi = sol.parameter.xi();
  const cplx phase = std::exp(kI * bilinear_dot(xi, x.cast<cplx>()));
  return phase * (kI * (1.0 + vg.value) * xi + vg.gradient);
}

double helmholtz_residual(const CgoSolution& sol) {
  const CubeGrid& g = sol.phi.grid;
  const double k2 = sol.parameter.k * sol.parameter.k;
  const double s = sol.parameter.real_norm();
  const double t = sol.parameter.imag_norm();
  const Mat3 R = sol.parameter.frame();
  FaddeevParameter fp;
  fp.s = s;
  fp.t = t;
  const ScalarField lphi = from_spectral(apply_faddeev_operator(sol.phi, fp));
  const ScalarField phi = from_spectral(sol.phi);
  const double half = 0.5 * g.R0() * (1.0 + 1e-12);
  double num = 0.0, den = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 y = g.node(p);
    if (y.cwiseAbs().maxCoeff() > half) continue;
    const double qv = sol.medium.value(R * y);
    const cplx phase = std::exp(kI * cplx(s * y(0), 0.0) - t * y(1));
    num += std::norm(phase * (lphi.values[p] + k2 * qv * (1.0 + phi.values[p])));
    den += std::norm(phase * (1.0 + phi.values[p]));
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

double cgo_MG(double q_c0, double q_h2, double k, double R0, double t) {
  const double c = R0 * k * k / kPi;
  if (q_h2 == 0.0) return 0.0;
  return ((c * (4.0 * q_c0 + 24.0) + 13.5) * 18.0 * c / t + 4.0 * c) * q_h2;
}

bool CertificateReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const CertificateEntry& e) { return e.pass; });
}

CertificateReport certify_decay(const CgoSolution& sol, double C_L) {
  const CubeGrid& g = sol.phi.grid;
  const double R0 = g.R0();
  const double k = sol.parameter.k;
  const double c = R0 * k * k / kPi;
  const double t = sol.parameter.imag_norm();
  const MediumNorms& qn = sol.medium.norms();
  const double qL2 = sobolev_norm(sol.q_projected, 0);
  const double qH1 = sobolev_norm(sol.q_projected, 1);
  const double qH2 = sobolev_norm(sol.q_projected, 2);

  CertificateReport rep;
  rep.t = t;
  rep.C_L = C_L;
  rep.threshold_l2 = 2.0 * c * qn.c0;
  rep.threshold_c2 = std::max({2.0 * c * qn.c2, kPi / R0, k * k});
  rep.threshold_remark = std::max(rep.threshold_c2, 2916.0 * c * qH2 * C_L);
  rep.M_G = t > 0.0 ? cgo_MG(qn.c0, qH2, k, R0, t) : INFINITY;

  const ScalarField fine = resample(sol.phi, 2 * g.n());
  double c0 = 0.0;
  for (const auto& v : fine.values) c0 = std::max(c0, std::abs(v));
  double grad_c0 = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const ScalarField d = resample(spectral_derivative(sol.phi, axis), 2 * g.n());
    for (const auto& v : d.values) grad_c0 = std::max(grad_c0, std::abs(v));
  }

  auto add = [&rep](const char* kind, double measured, double bound, bool applicable) {
    CertificateEntry e;
    e.kind = kind;
    e.measured = measured;
    e.bound = bound;
    e.applicable = applicable;
    e.pass = !applicable || measured <= bound;
    rep.entries.push_back(e);
  };
  const bool l2_ok = t > 0.0 && t >= rep.threshold_l2;
  const bool c2_ok = t > 0.0 && t >= rep.threshold_c2;
  const bool remark_ok = t > 0.0 && t >= rep.threshold_remark;
  const double inv_t = t > 0.0 ? 1.0 / t : INFINITY;
  add("L2", sobolev_norm(sol.phi, 0), 2.0 * c * inv_t * qL2, l2_ok);
  add("H1", sobolev_norm(sol.phi, 1), 18.0 * c * inv_t * qH1, c2_ok);
  add("H2", sobolev_norm(sol.phi, 2), 243.0 * c * inv_t * qH2, c2_ok);
  add("H3", sobolev_norm(sol.phi, 3), rep.M_G, c2_ok);
  add("C0", c0, 1.0 / 12.0, remark_ok);
  add("gradC0", grad_c0, rep.M_G * C_L, remark_ok);
  return rep;
}

ContinuityProbe continuity_probe(const Medium& q, const CgoParameter& xi1, const CgoParameter& xi2, const Vec3& x0,
                                 const CubeGrid& grid, double C_L, const CgoOptions& opts) {
  const double k = xi1.k;
  const double c = grid.R0() * k * k / kPi;
  const double thr = std::max({2.0 * c * q.norms().c2, kPi / grid.R0(), k * k});
  if (xi1.imag_norm() < thr || xi2.imag_norm() < thr)
    throw DomainError("continuity_probe: |Im xi| below the C2 threshold");
  const CgoSolution s1 = build_cgo(q, xi1, grid, opts);
  const CgoSolution s2 = build_cgo(q, xi2, grid, opts);
  ContinuityProbe out;
  out.lhs = std::abs(eval_phi(s1, x0).value - eval_phi(s2, x0).value);
  const double dxi = (xi1.xi() - xi2.xi()).norm();
  const double f = 1.0 + k * k * q.norms().c2;
  out.rhs = 52.0 * C_L * f * f * sobolev_norm(s2.phi, 3) * dxi;
  return out;
}

}  // namespace hsl
