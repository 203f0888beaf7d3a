#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "hsl/types.hpp"

namespace hsl {

struct GmresOptions {
  double tol = 1e-10;  ///< relative residual ||b - A x|| / ||b||
  int max_iter = 500;  ///< total inner iterations across restarts
  int restart = 60;
};

struct GmresResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations. `apply(v)` returns A v.
/// x holds the initial guess on entry and the iterate on exit.
template <class Apply>
GmresResult gmres(Apply&& apply, const Eigen::VectorXcd& b, Eigen::VectorXcd& x, const GmresOptions& opt = {}) {
  using Vec = Eigen::VectorXcd;
  GmresResult res;
  const double bnorm = b.norm();
  if (x.size() != b.size()) x = Vec::Zero(b.size());
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  const int m = std::max(1, opt.restart);
  Vec r = b - apply(x);
  double beta = r.norm();
  res.relative_residual = beta / bnorm;
  while (res.iterations < opt.max_iter) {
    if (res.relative_residual <= opt.tol) {
      res.converged = true;
      return res;
    }
    std::vector<Vec> V;
    V.reserve(m + 1);
    V.push_back(r / beta);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
    std::vector<cplx> cs(m), sn(m);
    Vec g = Vec::Zero(m + 1);
    g(0) = beta;
    int j = 0;
    for (; j < m && res.iterations < opt.max_iter; ++j) {
      ++res.iterations;
      Vec w = apply(V[j]);
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V[i].dot(w);
        w -= H(i, j) * V[i];
      }
      const double hn = w.norm();
      H(j + 1, j) = hn;
      for (int i = 0; i < j; ++i) {
        const cplx tmp = std::conj(cs[i]) * H(i, j) + std::conj(sn[i]) * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = tmp;
      }
      const double denom = std::hypot(std::abs(H(j, j)), hn);
      cs[j] = denom == 0.0 ? cplx(1.0) : H(j, j) / denom;
      sn[j] = denom == 0.0 ? cplx(0.0) : cplx(hn / denom);
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g(j + 1) = -sn[j] * g(j);
      g(j) = std::conj(cs[j]) * g(j);
      res.relative_residual = std::abs(g(j + 1)) / bnorm;
      if (hn > 0.0) V.push_back(w / hn);
      if (res.relative_residual <= opt.tol || hn == 0.0) {
        ++j;
        break;
      }
    }
    const Vec y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    for (int i = 0; i < j; ++i) x += y(i) * V[i];
    r = b - apply(x);
    beta = r.norm();
    res.relative_residual = beta / bnorm;
    if (beta == 0.0) break;
  }
  res.converged = res.relative_residual <= opt.tol;
  return res;
}

}  // namespace hsl
