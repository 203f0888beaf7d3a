#pragma once

#include <functional>
#include <vector>

namespace hsl {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n nodes on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Composite Gauss-Legendre over the given breakpoints, `per_panel` nodes per panel.
QuadratureRule composite_gauss_legendre(const std::vector<double>& breakpoints, int per_panel);

/// Integral of f over [a, b] with a fixed Gauss-Legendre rule.
double integrate(const std::function<double(double)>& f, double a, double b, int n = 64);

}  // namespace hsl
