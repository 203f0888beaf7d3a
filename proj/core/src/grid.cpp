#include "hsl/grid.hpp"

#include <cmath>
#include <string>

#include "hsl/fft.hpp"

namespace hsl {

CubeGrid::CubeGrid(double half_side, int nodes_per_axis) : half_side_(half_side), n_(nodes_per_axis) {
  if (!(half_side > 0.0) || !std::isfinite(half_side))
    throw DomainError("CubeGrid: R0 must be positive and finite");
  if (nodes_per_axis < 8 || nodes_per_axis % 2 != 0)
    throw DomainError("CubeGrid: n must be even and >= 8, got " + std::to_string(nodes_per_axis));
}

double CubeGrid::cell_volume() const {
  const double h = spacing();
  return h * h * h;
}

Vec3 CubeGrid::node(std::size_t flat) const {
  const auto nn = static_cast<std::size_t>(n_);
  const int k = static_cast<int>(flat % nn);
  const int j = static_cast<int>((flat / nn) % nn);
  const int i = static_cast<int>(flat / (nn * nn));
  return node(i, j, k);
}

bool CubeGrid::contains(const Vec3& x) const {
  const double lim = half_side_ * (1.0 + 1e-12);
  return std::abs(x(0)) <= lim && std::abs(x(1)) <= lim && std::abs(x(2)) <= lim;
}

double CubeGrid::frequency(int axis, int slot) const {
  const double m = mode(slot) + (axis == 1 ? 0.5 : 0.0);
  return kPi / half_side_ * m;
}

Vec3 CubeGrid::frequency(std::size_t flat) const {
  const auto nn = static_cast<std::size_t>(n_);
  const int s3 = static_cast<int>(flat % nn);
  const int s2 = static_cast<int>((flat / nn) % nn);
  const int s1 = static_cast<int>(flat / (nn * nn));
  return frequency(s1, s2, s3);
}

ScalarField::ScalarField(const CubeGrid& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size()) throw DomainError("ScalarField: value count must equal n^3");
}

SpectralField::SpectralField(const CubeGrid& g, std::vector<cplx> c) : grid(g), coeffs(std::move(c)) {
  if (coeffs.size() != g.size()) throw DomainError("SpectralField: coefficient count must equal n^3");
}

std::size_t SpectralField::slot_of(const FrequencyIndex& m) const {
  const int n = grid.n();
  auto slot = [n](int mi) {
    if (mi < -n / 2 || mi >= n / 2) throw DomainError("FrequencyIndex outside the grid band");
    return mi >= 0 ? mi : mi + n;
  };
  return grid.index(slot(m.m1), slot(m.m2), slot(m.m3));
}

cplx& SpectralField::at(const FrequencyIndex& m) { return coeffs[slot_of(m)]; }
cplx SpectralField::at(const FrequencyIndex& m) const { return coeffs[slot_of(m)]; }

namespace {

// exp(-i alpha . x0) for x0 = (-R0, -R0, -R0): (-1)^{m1+m2+m3} * i.
cplx corner_phase(int m1, int m2, int m3) {
  const int parity = ((m1 + m2 + m3) % 2 + 2) % 2;
  return parity == 0 ? kI : -kI;
}

// exp(i pi j / n): the half-frequency shift along axis 2 at node j.
std::vector<cplx> shift_table(int n) {
  std::vector<cplx> t(n);
  for (int j = 0; j < n; ++j) t[j] = std::polar(1.0, kPi * j / n);
  return t;
}

}  // namespace

SpectralField to_spectral(const ScalarField& f) {
  const CubeGrid& g = f.grid;
  const int n = g.n();
  const auto shift = shift_table(n);
  std::vector<cplx> buf(f.values);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx mod = std::conj(shift[j]);
      for (int k = 0; k < n; ++k) buf[g.index(i, j, k)] *= mod;
    }
  fft3d(buf, n, FftSign::kForward);
  const double scale = std::pow(2.0 * g.R0(), 1.5) / (static_cast<double>(n) * n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        buf[g.index(a, b, c)] *= scale * corner_phase(g.mode(a), g.mode(b), g.mode(c));
  return SpectralField(g, std::move(buf));
}

ScalarField from_spectral(const SpectralField& F) {
  const CubeGrid& g = F.grid;
  const int n = g.n();
  std::vector<cplx> buf(F.coeffs);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        buf[g.index(a, b, c)] *= std::conj(corner_phase(g.mode(a), g.mode(b), g.mode(c)));
  fft3d(buf, n, FftSign::kBackward);
  const auto shift = shift_table(n);
  const double scale = std::pow(2.0 * g.R0(), -1.5);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx mod = scale * shift[j];
      for (int k = 0; k < n; ++k) buf[g.index(i, j, k)] *= mod;
    }
  return ScalarField(g, std::move(buf));
}

namespace {

// Per-axis tables exp(i alpha_axis(slot) x_axis) and i alpha_axis(slot).
struct AxisTables {
  std::vector<cplx> phase[3];
  std::vector<double> freq[3];
};

AxisTables axis_tables(const CubeGrid& g, const Vec3& x) {
  AxisTables t;
  const int n = g.n();
  for (int axis = 0; axis < 3; ++axis) {
    t.phase[axis].resize(n);
    t.freq[axis].resize(n);
    for (int s = 0; s < n; ++s) {
      const double a = g.frequency(axis, s);
      t.freq[axis][s] = a;
      t.phase[axis][s] = std::polar(1.0, a * x(axis));
    }
  }
  return t;
}

void require_inside(const CubeGrid& g, const Vec3& x) {
  if (!g.contains(x)) throw DomainError("eval_at: point outside the closed cube D");
}

}  // namespace

cplx eval_at(const SpectralField& F, const Vec3& x) {
  const CubeGrid& g = F.grid;
  require_inside(g, x);
  const int n = g.n();
  const AxisTables t = axis_tables(g, x);
  cplx total = 0.0;
  for (int a = 0; a < n; ++a) {
    cplx s2 = 0.0;
    for (int b = 0; b < n; ++b) {
      const cplx* row = &F.coeffs[g.index(a, b, 0)];
      cplx s3 = 0.0;
      for (int c = 0; c < n; ++c) s3 += row[c] * t.phase[2][c];
      s2 += s3 * t.phase[1][b];
    }
    total += s2 * t.phase[0][a];
  }
  return total * std::pow(2.0 * g.R0(), -1.5);
}

ValueGradient eval_with_gradient(const SpectralField& F, const Vec3& x) {
  const CubeGrid& g = F.grid;
  require_inside(g, x);
  const int n = g.n();
  const AxisTables t = axis_tables(g, x);
  cplx v = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
  for (int a = 0; a < n; ++a) {
    cplx s2 = 0.0, s2d2 = 0.0, s2d3 = 0.0;
    for (int b = 0; b < n; ++b) {
      const cplx* row = &F.coeffs[g.index(a, b, 0)];
      cplx s3 = 0.0, s3d = 0.0;
      for (int c = 0; c < n; ++c) {
        const cplx term = row[c] * t.phase[2][c];
        s3 += term;
        s3d += term * t.freq[2][c];
      }
      s2 += s3 * t.phase[1][b];
      s2d2 += s3 * t.phase[1][b] * t.freq[1][b];
      s2d3 += s3d * t.phase[1][b];
    }
    v += s2 * t.phase[0][a];
    d1 += s2 * t.phase[0][a] * t.freq[0][a];
    d2 += s2d2 * t.phase[0][a];
    d3 += s2d3 * t.phase[0][a];
  }
  const double scale = std::pow(2.0 * g.R0(), -1.5);
  ValueGradient out;
  out.value = v * scale;
  out.gradient = CVec3(kI * d1 * scale, kI * d2 * scale, kI * d3 * scale);
  return out;
}

SpectralField spectral_derivative(const SpectralField& F, int axis) {
  if (axis < 0 || axis > 2) throw DomainError("spectral_derivative: axis must be 0, 1 or 2");
  SpectralField out(F.grid);
  const std::size_t N = F.coeffs.size();
  for (std::size_t p = 0; p < N; ++p) out.coeffs[p] = kI * F.grid.frequency(p)(axis) * F.coeffs[p];
  return out;
}

SpectralField spectral_laplacian(const SpectralField& F) {
  SpectralField out(F.grid);
  const std::size_t N = F.coeffs.size();
  for (std::size_t p = 0; p < N; ++p) out.coeffs[p] = -F.grid.frequency(p).squaredNorm() * F.coeffs[p];
  return out;
}

double sobolev_norm(const SpectralField& F, int s) {
  if (s < 0 || s > 3) throw DomainError("sobolev_norm: order must be in {0,1,2,3}");
  double sum = 0.0;
  const std::size_t N = F.coeffs.size();
  for (std::size_t p = 0; p < N; ++p) {
    const double w = 1.0 + F.grid.frequency(p).squaredNorm();
    sum += std::pow(w, s) * std::norm(F.coeffs[p]);
  }
  return std::sqrt(sum);
}

ScalarField resample(const SpectralField& F, int n_fine) {
  const CubeGrid& g = F.grid;
  if (n_fine < g.n()) throw DomainError("resample: target grid must not be coarser");
  CubeGrid fine(g.R0(), n_fine);
  SpectralField padded(fine);
  const int n = g.n();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        FrequencyIndex m{g.mode(a), g.mode(b), g.mode(c)};
        padded.at(m) = F.coeffs[g.index(a, b, c)];
      }
  return from_spectral(padded);
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  SpectralField out(a);
  for (std::size_t p = 0; p < out.coeffs.size(); ++p) out.coeffs[p] += b.coeffs[p];
  return out;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  SpectralField out(a);
  for (std::size_t p = 0; p < out.coeffs.size(); ++p) out.coeffs[p] -= b.coeffs[p];
  return out;
}

SpectralField operator*(cplx s, const SpectralField& a) {
  SpectralField out(a);
  for (auto& c : out.coeffs) c *= s;
  return out;
}

}  // namespace hsl
