#pragma once

#include <cstddef>
#include <vector>

#include "hsl/types.hpp"

namespace hsl {

/// Uniform periodic lattice on the cube D = (-R0, R0)^3 with n nodes per axis,
/// x_j = -R0 + 2 R0 j / n. Also indexes the shifted frequency grid
///
///   alpha = (pi / R0) * (m1, m2 + 1/2, m3),   -n/2 <= m_i < n/2,
///
/// whose half-integer second component keeps the Faddeev symbol away from zero.
/// Spectral storage uses FFT order on every axis: slot s holds m = s for
/// s < n/2 and m = s - n otherwise.
class CubeGrid {
 public:
  CubeGrid(double half_side, int nodes_per_axis);

  double R0() const { return half_side_; }
  int n() const { return n_; }
  double spacing() const { return 2.0 * half_side_ / n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  /// Volume of one lattice cell, h^3.
  double cell_volume() const;

  double coordinate(int j) const { return -half_side_ + spacing() * j; }
  Vec3 node(int i, int j, int k) const { return {coordinate(i), coordinate(j), coordinate(k)}; }
  Vec3 node(std::size_t flat) const;
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }

  /// Closed cube test, with a relative slack of 1e-12 on the faces.
  bool contains(const Vec3& x) const;

  int mode(int slot) const { return slot < n_ / 2 ? slot : slot - n_; }
  /// Frequency component along `axis` for storage slot `slot`.
  double frequency(int axis, int slot) const;
  Vec3 frequency(int s1, int s2, int s3) const {
    return {frequency(0, s1), frequency(1, s2), frequency(2, s3)};
  }
  Vec3 frequency(std::size_t flat) const;

  bool operator==(const CubeGrid& other) const {
    return half_side_ == other.half_side_ && n_ == other.n_;
  }

 private:
  double half_side_;
  int n_;
};

/// Integer label of a point of the shifted grid.
struct FrequencyIndex {
  int m1 = 0;
  int m2 = 0;
  int m3 = 0;

  Vec3 alpha(double R0) const { return (kPi / R0) * Vec3(m1, m2 + 0.5, m3); }
};

/// Complex samples at the lattice nodes.
struct ScalarField {
  CubeGrid grid;
  std::vector<cplx> values;

  explicit ScalarField(const CubeGrid& g) : grid(g), values(g.size()) {}
  ScalarField(const CubeGrid& g, std::vector<cplx> v);

  /// Samples f at every node.
  template <class F>
  static ScalarField sample(const CubeGrid& g, F&& f) {
    ScalarField out(g);
    const int n = g.n();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) out.values[g.index(i, j, k)] = f(g.node(i, j, k));
    return out;
  }
};

/// Coefficients f_hat(alpha) = int_D f conj(e_alpha), e_alpha = (2R0)^{-3/2} exp(i alpha.x).
struct SpectralField {
  CubeGrid grid;
  std::vector<cplx> coeffs;

  explicit SpectralField(const CubeGrid& g) : grid(g), coeffs(g.size()) {}
  SpectralField(const CubeGrid& g, std::vector<cplx> c);

  cplx& at(const FrequencyIndex& m);
  cplx at(const FrequencyIndex& m) const;
  std::size_t slot_of(const FrequencyIndex& m) const;
};

ScalarField from_spectral(const SpectralField& F);
SpectralField to_spectral(const ScalarField& f);

/// Sum_alpha F(alpha) e_alpha(x) by direct trigonometric summation.
/// Throws DomainError for x outside the closed cube.
cplx eval_at(const SpectralField& F, const Vec3& x);

/// Value and gradient of the trigonometric representative at x.
struct ValueGradient {
  cplx value;
  CVec3 gradient;
};
ValueGradient eval_with_gradient(const SpectralField& F, const Vec3& x);

/// Multiplies coefficients by i alpha_axis.
SpectralField spectral_derivative(const SpectralField& F, int axis);

/// Multiplies coefficients by -|alpha|^2.
SpectralField spectral_laplacian(const SpectralField& F);

/// (Sum (1 + |alpha|^2)^s |F(alpha)|^2)^{1/2}, s in {0, 1, 2, 3}.
double sobolev_norm(const SpectralField& F, int s);

/// Same trigonometric polynomial sampled on a finer lattice (n_fine >= n, even).
ScalarField resample(const SpectralField& F, int n_fine);

/// Band-limited representative of f on the lattice (transform of its samples).
template <class F>
SpectralField project(const CubeGrid& g, F&& f) {
  return to_spectral(ScalarField::sample(g, std::forward<F>(f)));
}

// Pointwise helpers on coefficient vectors.
SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(cplx s, const SpectralField& a);

}  // namespace hsl
