#ifndef KLEINMETRIC_COMMON_HPP
#define KLEINMETRIC_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace kleinmetric {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexMatrix = Matrix<std::complex<Scalar>>;

template <typename Scalar>
using ComplexVector = Vector<std::complex<Scalar>>;

// Every failure a library call can report. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NonPositiveSpectrum : public Error {
 public:
  using Error::Error;
};

class NotPositive : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class BasisMismatch : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  using Error::Error;
};

// Which coordinates a two-component object is expressed in: lattice sites,
// or the orthonormal eigenvectors of the kinetic operator.
enum class Basis { Site, KineticEigenbasis };

inline const char* to_string(Basis b) {
  return b == Basis::Site ? "site" : "kinetic_eigenbasis";
}

inline void require_dimension(bool ok, const std::string& what) {
  if (!ok) throw DimensionMismatch(what);
}

template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? typename Derived::RealScalar(0) : m.cwiseAbs().maxCoeff();
}

}  // namespace kleinmetric

#endif  // KLEINMETRIC_COMMON_HPP
