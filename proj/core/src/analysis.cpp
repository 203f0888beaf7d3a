#include "hsl/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "hsl/parallel.hpp"
#include "hsl/quadrature.hpp"
#include "hsl/rng.hpp"

namespace hsl {

// ----------------------------------------------------------------------------- embedding

double embedding_ratio(const SpectralField& f) {
  const double h2 = sobolev_norm(f, 2);
  if (!(h2 > 0.0)) throw DegenerateInputError("embedding_ratio: zero field");
  const ScalarField v = from_spectral(f);
  double sup = 0.0;
  for (const cplx& x : v.values) sup = std::max(sup, std::abs(x));
  return sup / h2;
}

EmbeddingEstimate estimate_CL(const CubeGrid& grid, std::uint64_t seed, int trials) {
  EmbeddingEstimate est;
  est.trials = trials;
  auto candidate = [&](double power) {
    SpectralField f(grid);
    for (std::size_t p = 0; p < f.coeffs.size(); ++p) f.coeffs[p] = std::pow(1.0 + grid.frequency(p).squaredNorm(), -power);
    return embedding_ratio(f);
  };
  est.peaked_ratio = candidate(1.0);
  est.optimal_ratio = candidate(2.0);
  CounterRng rng(seed, 0x434c);
  for (int t = 0; t < trials; ++t) {
    const double power = rng.uniform(0.5, 3.0);
    SpectralField f(grid);
    for (std::size_t p = 0; p < f.coeffs.size(); ++p) {
      const double re = rng.normal(), im = rng.normal();
      f.coeffs[p] = cplx(re, im) * std::pow(1.0 + grid.frequency(p).squaredNorm(), -power);
    }
    est.best_random = std::max(est.best_random, embedding_ratio(f));
  }
  est.value = std::max({est.peaked_ratio, est.optimal_ratio, est.best_random});
  return est;
}

// ----------------------------------------------------------------------------- cut-offs

namespace {

// Unit-ball mollifier G(rho) = exp(1 / (rho^2 - 1)) / Z and its radial derivatives.
struct Mollifier {
  double Z = 0.0;
  Mollifier() {
    Z = 4.0 * kPi * integrate([](double r) { return std::exp(1.0 / (r * r - 1.0)) * r * r; }, 0.0, 1.0, 200);
  }
  // Returns G, G' and the Laplacian G'' + 2 G' / rho.
  void eval(double rho, double& g, double& d1, double& lap) const {
    const double s = rho * rho - 1.0;
    g = s < 0.0 ? std::exp(1.0 / s) / Z : 0.0;
    if (g == 0.0) {
      d1 = lap = 0.0;
      return;
    }
    const double h1 = -2.0 * rho / (s * s);
    const double h2 = -2.0 / (s * s) + 8.0 * rho * rho / (s * s * s);
    d1 = g * h1;
    lap = g * (h1 * h1 + h2 - 4.0 / (s * s));
  }
};

const Mollifier& mollifier() {
  static const Mollifier m;
  return m;
}

const QuadratureRule& unit_rule() {
  static const QuadratureRule r = gauss_legendre(48);
  return r;
}

}  // namespace

MollifiedCutoff::MollifiedCutoff(const Vec3& centre, double eta) : centre_(centre), eta_(eta) {
  if (!(eta > 0.0)) throw DomainError("MollifiedCutoff: eta must be positive");
}

void MollifiedCutoff::radial(double r, double& value, double& d1, double& d2) const {
  // Scaled units: mollifier radius 1, removed ball radius 3.
  const double a = 0.5 * eta_;
  const double s = r / a;
  d1 = d2 = 0.0;
  if (s <= 2.0) {
    value = 0.0;
    return;
  }
  if (s >= 4.0) {
    value = 1.0;
    return;
  }
  const Mollifier& M = mollifier();
  const double split = std::abs(3.0 - s);
  double mass = 0.0, grad = 0.0, lap = 0.0;
  auto panel = [&](double lo, double hi) {
    if (!(hi > lo)) return;
    const QuadratureRule& u = unit_rule();
    for (std::size_t i = 0; i < u.nodes.size(); ++i) {
      const double rho = lo + 0.5 * (hi - lo) * (u.nodes[i] + 1.0);
      const double w = 0.5 * (hi - lo) * u.weights[i];
      const double c = std::clamp((9.0 - s * s - rho * rho) / (2.0 * s * rho), -1.0, 1.0);
      double g, g1, gl;
      M.eval(rho, g, g1, gl);
      const double cap = 2.0 * kPi * rho * rho * (c + 1.0);  // solid angle inside the removed ball
      mass += w * g * cap;
      lap += w * gl * cap;
      grad += w * g1 * rho * rho * kPi * (c * c - 1.0);
    }
  };
  panel(0.0, split);
  panel(split, 1.0);
  value = std::clamp(1.0 - mass, 0.0, 1.0);
  const double lap_s = -lap;
  d1 = grad / a;
  const double laplacian = lap_s / (a * a);
  d2 = laplacian - 2.0 * d1 / r;
}

CutoffSample MollifiedCutoff::eval(const Vec3& x) const {
  const Vec3 d = x - centre_;
  const double r = d.norm();
  double v, d1, d2;
  radial(r, v, d1, d2);
  CutoffSample out;
  out.value = v;
  if (d1 != 0.0 || d2 != 0.0) {
    out.gradient = d1 * d / r;
    out.laplacian = d2 + 2.0 * d1 / r;
  }
  return out;
}

ProductCutoff::ProductCutoff(const std::vector<Vec3>& centres, double eta) {
  for (std::size_t i = 0; i < centres.size(); ++i)
    for (std::size_t j = i + 1; j < centres.size(); ++j)
      if ((centres[i] - centres[j]).norm() < 4.0 * eta)
        throw DegenerateInputError("ProductCutoff: overlapping centres (closer than 4 eta)");
  for (const Vec3& c : centres) factors_.emplace_back(c, eta);
}

CutoffSample ProductCutoff::eval(const Vec3& x) const {
  std::vector<CutoffSample> f;
  f.reserve(factors_.size());
  for (const auto& m : factors_) f.push_back(m.eval(x));
  auto product_except = [&](std::size_t a, std::size_t b) {
    double p = 1.0;
    for (std::size_t l = 0; l < f.size(); ++l)
      if (l != a && l != b) p *= f[l].value;
    return p;
  };
  const std::size_t none = f.size();
  CutoffSample out;
  out.value = product_except(none, none);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double pi = product_except(i, none);
    out.gradient += f[i].gradient * pi;
    out.laplacian += f[i].laplacian * pi;
    for (std::size_t j = i + 1; j < f.size(); ++j)
      out.laplacian += 2.0 * f[i].gradient.dot(f[j].gradient) * product_except(i, j);
  }
  return out;
}

CutoffMeasurement measure_cutoff(const ProductCutoff& chi, double half_width, int n) {
  if (n < 2) throw DomainError("measure_cutoff: need n >= 2");
  CutoffMeasurement m;
  m.min_value = 1.0;
  m.max_value = 0.0;
  const double h = 2.0 * half_width / (n - 1);
  const double eta = chi.factors().empty() ? 1.0 : chi.factors()[0].eta();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const Vec3 x(-half_width + i * h, -half_width + j * h, -half_width + l * h);
        const CutoffSample s = chi.eval(x);
        ++m.samples;
        m.min_value = std::min(m.min_value, s.value);
        m.max_value = std::max(m.max_value, s.value);
        m.max_gradient = std::max(m.max_gradient, s.gradient.norm());
        m.max_laplacian = std::max(m.max_laplacian, std::abs(s.laplacian));
        double nearest = INFINITY;
        for (const auto& f : chi.factors()) nearest = std::min(nearest, (x - f.centre()).norm());
        if (nearest < eta && s.value != 0.0) m.zero_plateau = false;
        if (nearest > 2.0 * eta && s.value != 1.0) m.one_plateau = false;
      }
  m.gradient_constant = m.max_gradient * eta;
  m.laplacian_constant = m.max_laplacian * eta * eta;
  return m;
}

// ----------------------------------------------------------------------------- Carleman

AnnularDomain::AnnularDomain(double outer_radius, std::vector<ExcludedBall> excluded, const DomainQuadrature& quad)
    : outer_radius_(outer_radius), excluded_(std::move(excluded)) {
  if (!(outer_radius > 0.0)) throw DomainError("AnnularDomain: outer radius must be positive");
  for (std::size_t i = 0; i < excluded_.size(); ++i) {
    const auto& b = excluded_[i];
    if (!(b.radius > 0.0) || !(b.centre.norm() + b.radius < outer_radius))
      throw DomainError("AnnularDomain: excluded balls must lie strictly inside the outer ball");
    for (std::size_t j = i + 1; j < excluded_.size(); ++j)
      if (!((b.centre - excluded_[j].centre).norm() > b.radius + excluded_[j].radius))
        throw DomainError("AnnularDomain: excluded balls must be disjoint");
  }
  const MeasurementSphere dirs(1.0, quad.n_theta, quad.n_phi);
  const QuadratureRule radial = gauss_legendre(quad.n_radial);
  for (std::size_t p = 0; p < dirs.size(); ++p) {
    const Vec3& d = dirs.points()[p];
    std::vector<std::pair<double, double>> cuts;
    for (const auto& b : excluded_) {
      const double dc = d.dot(b.centre);
      const double disc = dc * dc - b.centre.squaredNorm() + b.radius * b.radius;
      if (disc <= 0.0) continue;
      const double lo = std::max(0.0, dc - std::sqrt(disc)), hi = dc + std::sqrt(disc);
      if (hi > 0.0) cuts.emplace_back(lo, hi);
    }
    std::sort(cuts.begin(), cuts.end());
    double start = 0.0;
    auto add = [&](double a, double b) {
      if (!(b > a)) return;
      for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
        const double t = a + 0.5 * (b - a) * (radial.nodes[i] + 1.0);
        vol_nodes_.push_back(t * d);
        vol_weights_.push_back(dirs.weights()[p] * t * t * 0.5 * (b - a) * radial.weights[i]);
      }
    };
    for (const auto& [lo, hi] : cuts) {
      add(start, lo);
      start = hi;
    }
    add(start, outer_radius);
  }
  const MeasurementSphere outer(outer_radius, quad.n_theta, quad.n_phi);
  bdy_nodes_ = outer.points();
  bdy_weights_ = outer.weights();
  for (const auto& b : excluded_) {
    const MeasurementSphere s(b.radius, quad.n_theta, quad.n_phi);
    for (std::size_t p = 0; p < s.size(); ++p) {
      bdy_nodes_.push_back(b.centre + s.points()[p]);
      bdy_weights_.push_back(s.weights()[p]);
    }
  }
}

bool AnnularDomain::contains(const Vec3& x) const {
  if (!(x.norm() < outer_radius_)) return false;
  for (const auto& b : excluded_)
    if ((x - b.centre).norm() <= b.radius) return false;
  return true;
}

bool AnnularDomain::avoids(const Vec3& z0, double eps) const {
  if (z0.norm() - eps >= outer_radius_) return true;
  for (const auto& b : excluded_)
    if ((z0 - b.centre).norm() + eps <= b.radius) return true;
  return false;
}

TestField plane_wave_field(const Vec3& direction, double k) {
  const Vec3 d = direction.normalized();
  TestField f;
  f.name = "plane_wave";
  f.eval = [d, k](const Vec3& x) {
    const cplx u = std::exp(kI * k * d.dot(x));
    return ValueGradient{u, (kI * k * u) * d.cast<cplx>()};
  };
  f.laplacian = [d, k](const Vec3& x) { return -k * k * std::exp(kI * k * d.dot(x)); };
  return f;
}

TestField green_field(const Vec3& z, double k) {
  TestField f;
  f.name = "green";
  f.eval = [z, k](const Vec3& x) { return ValueGradient{green_free(x, z, k), green_gradient(x, z, k)}; };
  f.laplacian = [z, k](const Vec3& x) { return -k * k * green_free(x, z, k); };
  return f;
}

TestField exponential_field(const Vec3& a) {
  TestField f;
  f.name = "exponential";
  f.eval = [a](const Vec3& x) {
    const double u = std::exp(a.dot(x));
    return ValueGradient{u, (u * a).cast<cplx>()};
  };
  f.laplacian = [a](const Vec3& x) { return cplx(a.squaredNorm() * std::exp(a.dot(x))); };
  return f;
}

TestField bump_wave_field(const Bump& bump, const Vec3& direction, double k) {
  const Medium b({bump});
  const Vec3 d = direction.normalized();
  TestField f;
  f.name = "bump_wave";
  f.eval = [b, d, k](const Vec3& x) {
    const cplx p = std::exp(kI * k * d.dot(x));
    const double beta = b.value(x);
    return ValueGradient{beta * p, p * (b.gradient(x).cast<cplx>() + (kI * k * beta) * d.cast<cplx>())};
  };
  f.laplacian = [b, d, k](const Vec3& x) {
    const cplx p = std::exp(kI * k * d.dot(x));
    const double beta = b.value(x);
    return p * (b.hessian(x).trace() + 2.0 * kI * k * d.dot(b.gradient(x)) - k * k * beta);
  };
  return f;
}

TestField scaled_sum(const TestField& f, cplx a, const TestField& g, cplx b) {
  TestField s;
  s.name = f.name + "+" + g.name;
  s.eval = [f, g, a, b](const Vec3& x) {
    const ValueGradient u = f.eval(x), v = g.eval(x);
    return ValueGradient{a * u.value + b * v.value, a * u.gradient + b * v.gradient};
  };
  s.laplacian = [f, g, a, b](const Vec3& x) { return a * f.laplacian(x) + b * g.laplacian(x); };
  return s;
}

std::vector<TestField> carleman_test_fields(int count, std::uint64_t seed, double k, const ExcludedBall& singular_ball) {
  CounterRng rng(seed, 0x6361726c);
  auto direction = [&]() -> Vec3 { return Vec3(rng.normal(), rng.normal(), rng.normal()).normalized(); };
  auto singular_point = [&]() -> Vec3 { return singular_ball.centre + 0.5 * singular_ball.radius * rng.uniform() * direction(); };
  std::vector<TestField> out;
  for (int i = 0; i < count; ++i) {
    switch (i % 5) {
      case 0: out.push_back(plane_wave_field(direction(), k)); break;
      case 1: out.push_back(green_field(singular_point(), k)); break;
      case 2: out.push_back(exponential_field(rng.uniform(0.2, 1.5) * direction())); break;
      case 3: out.push_back(bump_wave_field(Bump{1.0, 0.3 * rng.uniform() * direction(), rng.uniform(0.4, 0.7)}, direction(), k)); break;
      default:
        out.push_back(scaled_sum(green_field(singular_point(), k), 1.0, plane_wave_field(direction(), k),
                                 cplx(rng.normal(), rng.normal())));
    }
  }
  return out;
}

double tau0(double k, double q_c0, double q_grad_c0, double eps) {
  if (!(eps > 0.0)) throw DomainError("tau0: eps must be positive");
  return std::max({2.0, k * k * (1.0 + q_c0) / eps, k * k * q_grad_c0 / eps, 1.0 / (eps * eps)});
}

CarlemanReport carleman_check(const TestField& u, const AnnularDomain& omega, const Vec3& z0, double k, const Medium& q,
                              const std::vector<double>& taus, double eps, double R0) {
  CarlemanReport rep;
  rep.tau0 = tau0(k, q.norms().c0, q.norms().grad_c0, eps);
  rep.hypothesis_met = omega.avoids(z0, eps) && omega.outer_radius() <= 0.5 * R0;
  for (double t : taus) rep.hypothesis_met = rep.hypothesis_met && t >= rep.tau0;

  const auto& vn = omega.volume_nodes();
  const auto& bn = omega.boundary_nodes();
  std::vector<double> vphi(vn.size()), bphi(bn.size()), vu(vn.size()), vg(vn.size()), vA(vn.size()), bu(bn.size()),
      bg(bn.size());
  parallel_for(vn.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const ValueGradient f = u.eval(vn[i]);
      const cplx Au = u.laplacian(vn[i]) + k * k * (1.0 + q.value(vn[i])) * f.value;
      vphi[i] = (vn[i] - z0).squaredNorm();
      vu[i] = std::norm(f.value);
      vg[i] = f.gradient.squaredNorm();
      vA[i] = std::norm(Au);
    }
  });
  for (std::size_t i = 0; i < bn.size(); ++i) {
    const ValueGradient f = u.eval(bn[i]);
    bphi[i] = (bn[i] - z0).squaredNorm();
    bu[i] = std::norm(f.value);
    bg[i] = f.gradient.squaredNorm();
  }
  double phi_max = 0.0;
  for (double p : vphi) phi_max = std::max(phi_max, p);
  for (double p : bphi) phi_max = std::max(phi_max, p);

  const auto& vw = omega.volume_weights();
  const auto& bw = omega.boundary_weights();
  rep.c_min = INFINITY;
  rep.c_max = 0.0;
  for (double tau : taus) {
    CarlemanRow row;
    row.tau = tau;
    row.log_scale = 2.0 * tau * phi_max;
    double v0 = 0.0, v1 = 0.0, vA2 = 0.0, b0 = 0.0, b1 = 0.0;
    for (std::size_t i = 0; i < vn.size(); ++i) {
      const double w = vw[i] * std::exp(2.0 * tau * (vphi[i] - phi_max));
      v0 += w * vu[i];
      v1 += w * vg[i];
      vA2 += w * vA[i];
    }
    for (std::size_t i = 0; i < bn.size(); ++i) {
      const double w = bw[i] * std::exp(2.0 * tau * (bphi[i] - phi_max));
      b0 += w * bu[i];
      b1 += w * bg[i];
    }
    row.lhs = tau * tau * v0 + tau * v1;
    row.rhs = vA2 + tau * tau * tau * b0 + tau * b1;
    row.c_emp = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
    row.proof_constant = std::max({0.125, 0.5 * (6.0 * R0 + 3.0),
                                   0.5 * (10.0 * R0 * R0 + 3.0 / (tau * tau) + 4.0 * R0 * R0 * (6.0 * R0 + 3.0))});
    rep.within_proof_constant = rep.within_proof_constant && row.c_emp <= row.proof_constant;
    rep.c_min = std::min(rep.c_min, row.c_emp);
    rep.c_max = std::max(rep.c_max, row.c_emp);
    rep.rows.push_back(row);
  }
  if (rep.rows.empty()) rep.c_min = 0.0;
  return rep;
}

// ----------------------------------------------------------------------------- Holder stability

double holder_theta(double eta, double R0) {
  const double den = 2.0 + R0 * R0 - 4.0 * eta * eta;
  if (!(eta > 0.0) || !(den > 0.0)) throw DomainError("holder_theta: need eta > 0 and 4 eta^2 < 2 + R0^2");
  return 5.0 * eta * eta / den;
}

double epsilon0(double tau1, double R0, double eta, double M_u) {
  if (!(eta > 0.0)) throw DomainError("epsilon0: eta must be positive");
  return std::exp(-(2.0 + R0 * R0 - 4.0 * eta * eta) * tau1) * M_u / eta;
}

HolderFit holder_fit(const std::vector<double>& eps, const std::vector<double>& err) {
  if (eps.size() != err.size() || eps.size() < 4) throw DomainError("holder_fit: need at least 4 (eps, err) pairs");
  const std::size_t n = eps.size();
  double sx = 0.0, sy = 0.0;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0) || !(err[i] > 0.0)) throw DomainError("holder_fit: entries must be positive");
    x[i] = std::log(eps[i]);
    y[i] = std::log(err[i]);
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("holder_fit: eps values must not all coincide");
  HolderFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

FieldNorms domain_norms(const std::vector<Vec3>& nodes, double cell_volume, const std::vector<FieldJet>& jets,
                        double outer_radius, const std::vector<ExcludedBall>& excluded) {
  if (nodes.size() != jets.size()) throw DomainError("domain_norms: one jet per node is required");
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    bool inside = nodes[i].norm() < outer_radius;
    for (const auto& b : excluded) inside = inside && (nodes[i] - b.centre).norm() > b.radius;
    if (!inside) continue;
    s0 += std::norm(jets[i].value);
    s1 += jets[i].gradient.squaredNorm();
    s2 += jets[i].hessian.squaredNorm();
  }
  FieldNorms n;
  n.l2 = std::sqrt(s0 * cell_volume);
  n.h1 = std::sqrt((s0 + s1) * cell_volume);
  n.h2 = std::sqrt((s0 + s1 + s2) * cell_volume);
  return n;
}

std::vector<ExcludedBall> source_balls(const PointSourceSet& S1, const PointSourceSet& S2, double eta, double factor) {
  std::vector<ExcludedBall> balls;
  for (const auto& s : S1.sources) balls.push_back({s.location, factor * eta});
  for (int i : match_sources(S1, S2, eta).only_2) balls.push_back({S2.sources[i].location, factor * eta});
  return balls;
}

namespace {

// Jets of u(S1) - u(S2) at the given nodes. With q = 0 the fields are closed form; otherwise the
// lattice of the forward solutions is used and `nodes` is replaced by its nodes.
std::vector<FieldJet> difference_jets(const FieldSolution& f1, const FieldSolution& f2, std::vector<Vec3>& nodes) {
  const double k = f1.k;
  if (f1.medium.is_zero()) {
    std::vector<FieldJet> jets(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        FieldJet& J = jets[i];
        auto add = [&](const PointSourceSet& S, double sign) {
          for (const auto& s : S.sources) {
            if ((nodes[i] - s.location).norm() == 0.0) continue;
            const double c = -sign * s.amplitude;
            J.value += c * green_free(nodes[i], s.location, k);
            J.gradient += c * green_gradient(nodes[i], s.location, k);
            J.hessian += c * green_hessian(nodes[i], s.location, k);
          }
        };
        add(f1.sources, 1.0);
        add(f2.sources, -1.0);
      }
    });
    return jets;
  }
  const VolumeLattice& lat = f1.lattice;
  nodes.resize(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) nodes[i] = lat.node(i);
  const auto w1 = f1.lattice_fields(2), w2 = f2.lattice_fields(2);
  std::vector<FieldJet> jets(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      FieldJet& J = jets[i];
      J.value = w1[0][i] - w2[0][i];
      for (int a = 0; a < 3; ++a) J.gradient(a) = w1[1 + a][i] - w2[1 + a][i];
      const int diag[3] = {4, 5, 6};
      for (int a = 0; a < 3; ++a) J.hessian(a, a) = w1[diag[a]][i] - w2[diag[a]][i];
      J.hessian(0, 1) = J.hessian(1, 0) = w1[7][i] - w2[7][i];
      J.hessian(0, 2) = J.hessian(2, 0) = w1[8][i] - w2[8][i];
      J.hessian(1, 2) = J.hessian(2, 1) = w1[9][i] - w2[9][i];
      auto add = [&](const PointSourceSet& S, double sign) {
        for (const auto& s : S.sources) {
          if ((nodes[i] - s.location).norm() == 0.0) continue;
          const double c = -sign * s.amplitude;
          J.value += c * green_free(nodes[i], s.location, k);
          J.gradient += c * green_gradient(nodes[i], s.location, k);
          J.hessian += c * green_hessian(nodes[i], s.location, k);
        }
      };
      add(f1.sources, 1.0);
      add(f2.sources, -1.0);
    }
  });
  return jets;
}

}  // namespace

StabilityTable cauchy_stability_experiment(const PointSourceSet& S1, const Medium& q, double k, double eta,
                                           const StabilityOptions& opts) {
  if (!check_admissible(S1, opts.omega_radius)) throw DomainError("cauchy_stability_experiment: S1 is not admissible");
  StabilityTable table;
  table.theta = holder_theta(eta, opts.R0);

  ForwardOptions fo;
  fo.omega_radius = opts.omega_radius;
  fo.n = opts.forward_n;
  const MeasurementSphere sphere(opts.omega_radius, opts.n_theta, opts.n_phi);
  const FieldSolution f1 = solve_forward(S1, q, k, fo);
  const CauchyData data1 = extract_cauchy(f1, sphere);
  const int lmax = default_lmax(sphere);

  MultiRecoveryOptions ro = opts.recovery;
  ro.search.ball_radius = std::min(ro.search.ball_radius, opts.omega_radius);
  ro.search.half_width = std::min(ro.search.half_width, opts.omega_radius);

  std::vector<Vec3> lattice;
  double cell = 0.0;
  if (opts.lattice_n > 0) {
    const double h = 2.0 * opts.omega_radius / opts.lattice_n;
    cell = h * h * h;
    for (int i = 0; i < opts.lattice_n; ++i)
      for (int j = 0; j < opts.lattice_n; ++j)
        for (int l = 0; l < opts.lattice_n; ++l)
          lattice.emplace_back(-opts.omega_radius + (i + 0.5) * h, -opts.omega_radius + (j + 0.5) * h,
                               -opts.omega_radius + (l + 0.5) * h);
  }

  for (double eps : opts.eps) {
    for (int s = 0; s < opts.seeds; ++s) {
      StabilityRow row;
      row.eps = eps;
      row.seed = CounterRng::splitmix64(opts.seed + static_cast<std::uint64_t>(s));
      try {
        const CauchyData noisy = perturb_cauchy(data1, eps, row.seed);
        PointSourceSet S2;
        S2.eta = S1.eta;
        S2.N0 = S1.N0;
        S2.a_bar = S1.a_bar;
        if (opts.single_source) {
          const HeatMap map = imaging_functional(noisy, k, ro.search, ro.n_directions);
          const SingleSourceFit fit = recover_single_source(noisy, q, k, map.points[map.argmax], ro.fit);
          S2.sources.push_back({fit.amplitude.real(), fit.location});
        } else {
          S2 = recover_multi_source(noisy, q, k, eta, ro).recovered;
          S2.a_bar = S1.a_bar;
        }
        row.recovered = static_cast<int>(S2.size());
        const Matching m = match_sources(S1, S2, eta);
        row.matching_ok = m.only_1.empty() && m.only_2.empty();
        for (int j : m.matched) {
          const auto &a = S1.sources[j], &b = S2.sources[m.pi[j]];
          row.err_a = std::max(row.err_a, std::abs(a.amplitude - b.amplitude));
          row.err_z = std::max(row.err_z, a.amplitude * (a.location - b.location).norm());
        }
        for (int j : m.only_1) row.err_a = std::max(row.err_a, S1.sources[j].amplitude);
        for (int i : m.only_2) row.err_a = std::max(row.err_a, std::abs(S2.sources[i].amplitude));

        ForwardOptions fo2 = fo;
        fo2.check_admissibility = false;
        const FieldSolution f2 = solve_forward(S2, q, k, fo2);
        row.data_misfit = cauchy_misfit(data1 - extract_cauchy(f2, sphere), lmax);
        if (opts.lattice_n > 0) {
          std::vector<Vec3> nodes = lattice;
          const std::vector<FieldJet> jets = difference_jets(f1, f2, nodes);
          const double vol = q.is_zero() ? cell : f1.lattice.cell_volume();
          row.h1_interior = domain_norms(nodes, vol, jets, opts.omega_radius, source_balls(S1, S2, eta, 3.0)).h1;
          row.h2_inner = domain_norms(nodes, vol, jets, opts.omega_radius, source_balls(S1, S2, eta, 1.0)).h2;
          table.M_u = std::max(table.M_u, row.h2_inner);
        }
      } catch (const Error& e) {
        row.failure = e.what();
        row.matching_ok = false;
      }
      if (!row.matching_ok && (table.breakdown_eps == 0.0 || eps < table.breakdown_eps)) table.breakdown_eps = eps;
      table.rows.push_back(row);
    }
  }
  for (auto& row : table.rows)
    if (row.failure.empty() && row.data_misfit > 0.0 && table.M_u > 0.0)
      row.bound = std::sqrt(2.0) * std::pow(table.M_u / eta, 1.0 - table.theta) * std::pow(row.data_misfit, table.theta);
  return table;
}

}  // namespace hsl
