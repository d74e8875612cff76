#ifndef KLEINMETRIC_LATTICE_HPP
#define KLEINMETRIC_LATTICE_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kleinmetric/common.hpp"

namespace kleinmetric {

enum class BoundaryCondition { Dirichlet, Periodic };

inline const char* to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::Dirichlet ? "dirichlet" : "periodic";
}

/// Uniform 1-D grid x_k = k h carrying the kinetic operator K = -Laplacian + m^2.
template <typename Scalar = double>
struct LatticeConfig {
  int n = 1;
  Scalar h = 1;
  Scalar mass = 0;
  BoundaryCondition bc = BoundaryCondition::Dirichlet;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const {
    if (n < 1) throw ConfigError("lattice: n must be >= 1, got " + std::to_string(n));
    if (!(h > 0) || !std::isfinite(static_cast<double>(h)))
      throw ConfigError("lattice: h must be a positive finite number");
    if (!(mass >= 0) || !std::isfinite(static_cast<double>(mass)))
      throw ConfigError("lattice: mass must be a non-negative finite number");
    if (bc == BoundaryCondition::Periodic && !(mass > 0))
      throw ConfigError("lattice: periodic boundary requires mass > 0 (zero mode)");
  }

  /// Position of site i (0-based). Dirichlet sites sit strictly inside the
  /// box [0, (n+1)h]; periodic sites cover [0, nh).
  Scalar position(int i) const {
    return bc == BoundaryCondition::Dirichlet ? Scalar(i + 1) * h : Scalar(i) * h;
  }

  /// Length of the box (Dirichlet) or ring (periodic) the sites live on.
  Scalar extent() const { return bc == BoundaryCondition::Dirichlet ? Scalar(n + 1) * h : Scalar(n) * h; }
};

/// Eigenvalues (ascending, all positive) and orthonormal eigenvectors of K.
/// Column j of `eigenvectors` is the mode belonging to `eigenvalues[j]`.
template <typename Scalar = double>
struct KineticSpectrum {
  Vector<Scalar> eigenvalues;
  Matrix<Scalar> eigenvectors;

  int size() const { return static_cast<int>(eigenvalues.size()); }

  /// The matrix K reassembled from its spectral resolution.
  Matrix<Scalar> kinetic() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
  }

  /// K^{1/2} by spectral resolution.
  Matrix<Scalar> kinetic_sqrt() const {
    return eigenvectors * eigenvalues.cwiseSqrt().asDiagonal() * eigenvectors.transpose();
  }
};

namespace detail {

template <typename Scalar>
Scalar positivity_tolerance(Scalar scale, Eigen::Index n) {
  using std::max;
  return Scalar(1e-12) * max(Scalar(1), scale) * Scalar(max<Eigen::Index>(n, 1));
}

// First entry with magnitude above 1e-12 becomes positive.
template <typename Scalar>
void fix_column_signs(Matrix<Scalar>& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      if (std::abs(v(i, j)) > Scalar(1e-12)) {
        if (v(i, j) < 0) v.col(j) = -v.col(j);
        break;
      }
    }
  }
}

}  // namespace detail

/// Builds the spectrum from given data, checking positivity and orthogonality.
/// Useful when a diagonal K (eigenvector matrix = I) is all that is needed.
template <typename Scalar>
KineticSpectrum<Scalar> make_spectrum(Vector<Scalar> eigenvalues, Matrix<Scalar> eigenvectors) {
  const auto n = eigenvalues.size();
  require_dimension(eigenvectors.rows() == n && eigenvectors.cols() == n,
                    "make_spectrum: eigenvector matrix must be n x n");
  if (n == 0) throw ConfigError("make_spectrum: empty spectrum");
  if (!(eigenvalues.minCoeff() > 0))
    throw NonPositiveSpectrum("kinetic spectrum has a non-positive eigenvalue; energies would not be real");
  const Matrix<Scalar> gram = eigenvectors.transpose() * eigenvectors - Matrix<Scalar>::Identity(n, n);
  if (max_abs(gram) > Scalar(n) * Scalar(1e-10))
    throw ConfigError("make_spectrum: eigenvectors are not orthonormal");
  return {std::move(eigenvalues), std::move(eigenvectors)};
}

template <typename Scalar>
KineticSpectrum<Scalar> make_spectrum(Vector<Scalar> eigenvalues) {
  const auto n = eigenvalues.size();
  return make_spectrum<Scalar>(std::move(eigenvalues), Matrix<Scalar>::Identity(n, n));
}

/// Second-difference stencil for -Laplacian, entries (-1, 2, -1)/h^2.
/// Periodic boundaries add the corner couplings. Symmetric bit for bit.
template <typename Scalar>
Matrix<Scalar> build_laplacian(const LatticeConfig<Scalar>& cfg) {
  if (cfg.n < 1) throw ConfigError("lattice: n must be >= 1, got " + std::to_string(cfg.n));
  if (!(cfg.h > 0)) throw ConfigError("lattice: h must be positive");
  const int n = cfg.n;
  const Scalar inv_h2 = Scalar(1) / (cfg.h * cfg.h);
  Matrix<Scalar> lap = Matrix<Scalar>::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    lap(i, i) = Scalar(2) * inv_h2;
    if (i + 1 < n) {
      lap(i, i + 1) = -inv_h2;
      lap(i + 1, i) = -inv_h2;
    }
  }
  if (cfg.bc == BoundaryCondition::Periodic) {
    if (n == 1) {
      // A one-site ring is its own neighbour on both sides.
      lap(0, 0) = 0;
    } else {
      // n == 2: both neighbours of a site are the same site.
      lap(0, n - 1) += -inv_h2;
      lap(n - 1, 0) = lap(0, n - 1);
    }
  }
  return lap;
}

/// K = -Laplacian + m^2 I.
template <typename Scalar>
Matrix<Scalar> build_kinetic(const LatticeConfig<Scalar>& cfg) {
  cfg.validate();
  Matrix<Scalar> k = build_laplacian(cfg);
  k.diagonal().array() += cfg.mass * cfg.mass;
  return k;
}

/// Dense symmetric eigensolve with ascending eigenvalues and sign-fixed
/// eigenvectors. Throws NonPositiveSpectrum if the smallest eigenvalue does
/// not clear the positivity tolerance n * 1e-12 * max(1, |K|_max).
template <typename Derived>
KineticSpectrum<typename Derived::Scalar> eigendecompose(const Eigen::MatrixBase<Derived>& k) {
  using Scalar = typename Derived::Scalar;
  require_dimension(k.rows() == k.cols(), "eigendecompose: matrix must be square");
  if (k.rows() == 0) throw ConfigError("eigendecompose: empty matrix");
  const Scalar scale = max_abs(k);
  if (max_abs(k - k.transpose()) > Scalar(1e-12) * std::max(Scalar(1), scale))
    throw ConfigError("eigendecompose: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(k);
  if (solver.info() != Eigen::Success) throw Error("eigendecompose: symmetric eigensolver failed");

  KineticSpectrum<Scalar> out{solver.eigenvalues(), solver.eigenvectors()};
  if (!(out.eigenvalues(0) > detail::positivity_tolerance(scale, k.rows())))
    throw NonPositiveSpectrum("kinetic spectrum has a non-positive eigenvalue (" +
                              std::to_string(static_cast<double>(out.eigenvalues(0))) +
                              "); energies would not be real");
  detail::fix_column_signs(out.eigenvectors);
  return out;
}

template <typename Scalar>
KineticSpectrum<Scalar> kinetic_spectrum(const LatticeConfig<Scalar>& cfg) {
  return eigendecompose(build_kinetic(cfg));
}

/// Closed-form eigenvalue j (1-based) of the Dirichlet stencil plus mass:
/// (2 - 2 cos(j pi / (n+1))) / h^2 + m^2.
template <typename Scalar>
Scalar dirichlet_eigenvalue_exact(int j, const LatticeConfig<Scalar>& cfg) {
  if (cfg.bc != BoundaryCondition::Dirichlet)
    throw ConfigError("dirichlet_eigenvalue_exact: requires Dirichlet boundary");
  if (j < 1 || j > cfg.n)
    throw ConfigError("dirichlet_eigenvalue_exact: mode index " + std::to_string(j) +
                      " outside [1, " + std::to_string(cfg.n) + "]");
  using std::sin;
  // 2 - 2cos(x) written as 4 sin^2(x/2) to avoid cancellation at small x.
  const Scalar half_angle = Scalar(j) * std::numbers::pi_v<Scalar> / Scalar(2 * (cfg.n + 1));
  const Scalar s = sin(half_angle);
  return Scalar(4) * s * s / (cfg.h * cfg.h) + cfg.mass * cfg.mass;
}

/// Free relativistic dispersion: (+sqrt(k^2 + m^2), -sqrt(k^2 + m^2)).
template <typename Scalar>
std::pair<Scalar, Scalar> continuum_dispersion(Scalar k, Scalar m) {
  using std::hypot;
  const Scalar e = hypot(k, m);
  return {e, -e};
}

struct ConvergenceLevel {
  int n = 0;
  double h = 0;
  std::vector<double> eigenvalues;  // lowest few discrete eigenvalues of K
  std::vector<double> targets;      // (j pi / L)^2 + m^2
  std::vector<double> errors;       // |eigenvalue - target|
  std::optional<double> theta_condition_number;
};

struct ConvergenceReport {
  double box_length = 0;
  double mass = 0;
  std::vector<ConvergenceLevel> levels;
  /// Least-squares slope of log(error of the lowest mode) against log(h).
  double fitted_order = 0;
};

/// Least-squares slope of log(err) vs log(h). Needs at least two levels with
/// nonzero error; returns NaN otherwise.
inline double fit_convergence_order(const std::vector<double>& hs, const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < hs.size() && i < errs.size(); ++i) {
    if (!(errs[i] > 0) || !(hs[i] > 0)) continue;
    const double x = std::log(hs[i]);
    const double y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::nan("");
  const double denom = count * sxx - sx * sx;
  if (denom == 0) return std::nan("");
  return (count * sxy - sx * sy) / denom;
}

/// Dirichlet box of length `box_length` discretized at each level with
/// h = L / (n + 1). Reports the lowest `modes` eigenvalues against the
/// continuum targets and the fitted convergence order of the lowest mode.
inline ConvergenceReport convergence_study(double box_length, double mass, const std::vector<int>& levels,
                                           int modes = 3) {
  if (!(box_length > 0)) throw ConfigError("convergence: box length must be positive");
  if (levels.empty()) throw ConfigError("convergence: no levels given");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1) throw ConfigError("convergence: levels must be >= 1");
    if (i > 0 && levels[i] <= levels[i - 1]) throw ConfigError("convergence: levels must be increasing");
  }

  ConvergenceReport report;
  report.box_length = box_length;
  report.mass = mass;
  std::vector<double> hs, errs;
  for (int n : levels) {
    LatticeConfig<double> cfg{n, box_length / (n + 1), mass, BoundaryCondition::Dirichlet};
    const auto spectrum = kinetic_spectrum(cfg);
    ConvergenceLevel level;
    level.n = n;
    level.h = cfg.h;
    const int count = std::min(modes, n);
    for (int j = 1; j <= count; ++j) {
      const double kj = j * std::numbers::pi / box_length;
      const double target = kj * kj + mass * mass;
      const double value = spectrum.eigenvalues(j - 1);
      level.eigenvalues.push_back(value);
      level.targets.push_back(target);
      level.errors.push_back(std::abs(value - target));
    }
    hs.push_back(level.h);
    errs.push_back(level.errors.front());
    report.levels.push_back(std::move(level));
  }
  report.fitted_order = fit_convergence_order(hs, errs);
  return report;
}

}  // namespace kleinmetric

#endif  // KLEINMETRIC_LATTICE_HPP
