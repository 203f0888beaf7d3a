#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace hsl {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (point outside D, bad order, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a kernel singularity (x == z for the Green function).
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Geometrically degenerate input, e.g. coincident points where distinct ones are required.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// More candidate sources than the admissible set allows.
class ModelOrderError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver that failed to reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

// Complex bilinear (not Hermitian) dot product.
inline cplx bilinear_dot(const CVec3& a, const CVec3& b) {
  return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

}  // namespace hsl
