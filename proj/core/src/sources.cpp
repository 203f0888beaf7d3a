#include "hsl/sources.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hsl/quadrature.hpp"
#include "hsl/rng.hpp"

namespace hsl {

MeasurementSphere::MeasurementSphere(double radius, int n_theta, int n_phi)
    : radius_(radius), n_theta_(n_theta), n_phi_(n_phi) {
  if (!(radius > 0.0)) throw DomainError("MeasurementSphere: radius must be positive");
  if (n_theta < 2 || n_phi < 3) throw DomainError("MeasurementSphere: need n_theta >= 2 and n_phi >= 3");
  const QuadratureRule gl = gauss_legendre(n_theta);
  const double dphi = 2.0 * kPi / n_phi;
  const double r2 = radius * radius;
  theta_.resize(n_theta);
  points_.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  for (int a = 0; a < n_theta; ++a) {
    // Gauss-Legendre nodes ascend in cos(theta); store theta ascending instead.
    const double c = gl.nodes[n_theta - 1 - a];
    const double w = gl.weights[n_theta - 1 - a];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    theta_[a] = std::acos(c);
    for (int b = 0; b < n_phi; ++b) {
      const double ph = dphi * b;
      const Vec3 nrm(s * std::cos(ph), s * std::sin(ph), c);
      normals_.push_back(nrm);
      points_.push_back(radius * nrm);
      weights_.push_back(r2 * w * dphi);
    }
  }
}

AdmissibilityReport check_admissible(const PointSourceSet& S, const MeasurementSphere& omega) {
  return check_admissible(S, omega.radius());
}

AdmissibilityReport check_admissible(const PointSourceSet& S, double omega_radius) {
  AdmissibilityReport rep;
  auto fail = [&rep](const std::string& msg) {
    rep.admissible = false;
    rep.violations.push_back(msg);
  };
  if (!(S.eta > 0.0)) fail("eta must be positive");
  if (static_cast<int>(S.size()) > S.N0) {
    std::ostringstream os;
    os << "source count " << S.size() << " exceeds N0 = " << S.N0;
    fail(os.str());
  }
  const double sep = 8.0 * S.eta;
  for (std::size_t i = 0; i < S.size(); ++i) {
    const auto& s = S.sources[i];
    if (!(s.amplitude >= 0.0 && s.amplitude < S.a_bar)) {
      std::ostringstream os;
      os << "source " << i << ": amplitude " << s.amplitude << " outside [0, " << S.a_bar << ")";
      fail(os.str());
    }
    const double dist = omega_radius - s.location.norm();
    if (!(dist > sep)) {
      std::ostringstream os;
      os << "source " << i << ": distance to boundary " << dist << " not above 8 eta = " << sep;
      fail(os.str());
    }
    for (std::size_t j = i + 1; j < S.size(); ++j) {
      const double d = (s.location - S.sources[j].location).norm();
      if (!(d > sep)) {
        std::ostringstream os;
        os << "sources " << i << " and " << j << ": separation " << d << " not above 8 eta = " << sep;
        fail(os.str());
      }
    }
  }
  return rep;
}

PointSourceSet random_admissible(std::uint64_t seed, int count, double eta, double omega_radius, double a_min,
                                 double a_max) {
  PointSourceSet S;
  S.eta = eta;
  S.N0 = std::max(S.N0, count);
  S.a_bar = std::max(S.a_bar, a_max);
  const double sep = 8.0 * eta;
  const double reach = omega_radius - sep;
  if (!(reach > 0.0)) throw DegenerateInputError("random_admissible: omega too small for 8 eta margins");
  CounterRng rng(seed, 0x736f75726365);
  int rejected = 0;
  while (static_cast<int>(S.size()) < count) {
    const Vec3 z(rng.uniform(-reach, reach), rng.uniform(-reach, reach), rng.uniform(-reach, reach));
    bool ok = z.norm() < reach * (1.0 - 1e-9);
    for (const auto& s : S.sources) ok = ok && (s.location - z).norm() > sep * (1.0 + 1e-9);
    if (!ok) {
      if (++rejected > 10000) throw DegenerateInputError("random_admissible: cannot place the requested sources");
      continue;
    }
    rejected = 0;
    S.sources.push_back({rng.uniform(a_min, a_max), z});
  }
  return S;
}

cplx green_free(const Vec3& x, const Vec3& z, double k) {
  const double r = (x - z).norm();
  if (r == 0.0) throw SingularityError("green_free: x coincides with the source point");
  return std::polar(1.0 / (4.0 * kPi * r), k * r);
}

CVec3 green_gradient(const Vec3& x, const Vec3& z, double k) {
  const Vec3 d = x - z;
  const double r = d.norm();
  if (r == 0.0) throw SingularityError("green_gradient: x coincides with the source point");
  const cplx phi = std::polar(1.0 / (4.0 * kPi * r), k * r);
  const cplx fr = phi * (kI * k - 1.0 / r);
  return (fr / r) * d.cast<cplx>();
}

Eigen::Matrix3cd green_hessian(const Vec3& x, const Vec3& z, double k) {
  const Vec3 d = x - z;
  const double r = d.norm();
  if (r == 0.0) throw SingularityError("green_hessian: x coincides with the source point");
  const cplx phi = std::polar(1.0 / (4.0 * kPi * r), k * r);
  const cplx g = kI * k - 1.0 / r;
  const cplx fr = phi * g;
  const cplx frr = phi * (g * g + 1.0 / (r * r));
  const Vec3 u = d / r;
  const Mat3 uu = u * u.transpose();
  return frr * uu.cast<cplx>() + (fr / r) * (Mat3::Identity() - uu).cast<cplx>();
}

cplx eval_u0(const PointSourceSet& S, double k, const Vec3& x) {
  cplx u = 0.0;
  for (const auto& s : S.sources) u -= s.amplitude * green_free(x, s.location, k);
  return u;
}

CVec3 eval_grad_u0(const PointSourceSet& S, double k, const Vec3& x) {
  CVec3 g = CVec3::Zero();
  for (const auto& s : S.sources) g -= s.amplitude * green_gradient(x, s.location, k);
  return g;
}

double integrate_ball(const std::function<double(const Vec3&)>& f, double radius,
                      const std::vector<Vec3>& singular_points, const BallQuadratureOptions& opts) {
  const QuadratureRule gr = gauss_legendre(opts.n_radial, 0.0, 1.0);
  const QuadratureRule gt = gauss_legendre(opts.n_theta);
  const double dphi = 2.0 * kPi / opts.n_phi;
  const std::vector<Vec3> centres = singular_points.empty() ? std::vector<Vec3>{Vec3::Zero()} : singular_points;
  const double R2 = radius * radius;

  // Radial panels double in length from a quarter of the closest centre spacing, so the
  // near-singular region around a neighbouring centre is resolved.
  double spacing = radius;
  for (std::size_t i = 0; i < centres.size(); ++i)
    for (std::size_t j = i + 1; j < centres.size(); ++j) spacing = std::min(spacing, (centres[i] - centres[j]).norm());
  const double first_panel = std::max(0.25 * spacing, 1e-12 * radius);

  double total = 0.0;
  for (std::size_t i = 0; i < centres.size(); ++i) {
    const Vec3& p = centres[i];
    if (p.norm() >= radius) throw DomainError("integrate_ball: singular point outside the ball");
    for (int a = 0; a < opts.n_theta; ++a) {
      const double c = gt.nodes[a];
      const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
      for (int b = 0; b < opts.n_phi; ++b) {
        const double ph = dphi * b;
        const Vec3 dir(s * std::cos(ph), s * std::sin(ph), c);
        const double pd = p.dot(dir);
        const double rmax = -pd + std::sqrt(pd * pd + R2 - p.squaredNorm());
        double radial = 0.0;
        double lo = 0.0, hi = std::min(first_panel, rmax);
        while (lo < rmax) {
          for (int m = 0; m < opts.n_radial; ++m) {
            const double r = lo + (hi - lo) * gr.nodes[m];
            const Vec3 x = p + r * dir;
            double share = 1.0;
            if (centres.size() > 1) {
              const double di2 = r * r;
              double denom = 1.0;
              for (std::size_t j = 0; j < centres.size(); ++j)
                if (j != i) denom += di2 / (x - centres[j]).squaredNorm();
              share = 1.0 / denom;
            }
            radial += (hi - lo) * gr.weights[m] * r * r * share * f(x);
          }
          lo = hi;
          hi = std::min(2.0 * hi, rmax);
        }
        total += gt.weights[a] * dphi * radial;
      }
    }
  }
  return total;
}

double green_l2_norm(const Vec3& z, double rho, const BallQuadratureOptions& opts) {
  // |Phi|^2 = 1 / (16 pi^2 |x - z|^2) for real k.
  const double v = integrate_ball(
      [&z](const Vec3& x) { return 1.0 / (16.0 * kPi * kPi * (x - z).squaredNorm()); }, rho, {z}, opts);
  return std::sqrt(v);
}

U0DifferenceAudit u0_difference_bound(const PointSourceSet& S1, const PointSourceSet& S2,
                                      const std::vector<int>& pairing, double alpha, double k, double R0,
                                      double omega_radius, const BallQuadratureOptions& opts) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("u0_difference_bound: alpha must lie in (0, 1/2)");
  if (S1.size() != S2.size() || pairing.size() != S1.size())
    throw DomainError("u0_difference_bound: source sets and pairing must have equal size");

  U0DifferenceAudit out;
  // The L^2 norm of 1/r over a ball is largest when the ball is centred on the singularity.
  out.m1 = std::sqrt(omega_radius / (4.0 * kPi));
  const double base = 4.0 * std::sqrt(kPi) * std::sqrt(1.0 + std::pow(2.0 * R0, 0.75));
  double rhs = 0.0;
  for (std::size_t i = 0; i < S1.size(); ++i) {
    const auto& s1 = S1.sources[i];
    const auto& s2 = S2.sources.at(static_cast<std::size_t>(pairing[i]));
    const double dz = (s1.location - s2.location).norm();
    const double m2 = base + 2.0 * std::sqrt(kPi) * std::pow(dz, 1.0 - 1.5 * alpha);
    out.m2 = std::max(out.m2, m2);
    rhs += out.m1 * std::abs(s1.amplitude - s2.amplitude) + m2 * std::pow(dz, alpha);
  }
  out.rhs = rhs;

  std::vector<Vec3> sing;
  for (const auto& s : S1.sources) sing.push_back(s.location);
  for (const auto& s : S2.sources) {
    bool dup = false;
    for (const auto& p : sing) dup = dup || (p - s.location).norm() == 0.0;
    if (!dup) sing.push_back(s.location);
  }
  auto integrand = [&](const Vec3& x) {
    cplx d = 0.0;
    for (const auto& s : S1.sources)
      if (s.amplitude != 0.0) d -= s.amplitude * green_free(x, s.location, k);
    for (const auto& s : S2.sources)
      if (s.amplitude != 0.0) d += s.amplitude * green_free(x, s.location, k);
    return std::norm(d);
  };
  out.lhs = std::sqrt(std::max(0.0, integrate_ball(integrand, omega_radius, sing, opts)));
  return out;
}

}  // namespace hsl
