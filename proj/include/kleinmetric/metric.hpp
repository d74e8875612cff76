#ifndef KLEINMETRIC_METRIC_HPP
#define KLEINMETRIC_METRIC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kleinmetric/common.hpp"
#include "kleinmetric/feshbach_villars.hpp"
#include "kleinmetric/lattice.hpp"

namespace kleinmetric {

enum class MetricMode { PerMode, ContinuousForm };

inline const char* to_string(MetricMode m) { return m == MetricMode::PerMode ? "per_mode" : "continuous"; }

/// Selects one member of the metric family. In kinetic-eigenbasis
/// coordinates every mode i contributes the 2x2 block
///
///     [ alpha_i       c_i        ]
///     [ c_i           a_i alpha_i ]
///
/// with c_i = beta_i (PerMode) or c_i = beta sqrt(a_i) (ContinuousForm,
/// the beta K^{1/2} coupling with scalar alpha, beta shared by all modes).
template <typename Scalar = double>
struct MetricParams {
  MetricMode mode = MetricMode::PerMode;
  Vector<Scalar> alphas;
  Vector<Scalar> betas;

  static MetricParams per_mode(Vector<Scalar> alphas, Vector<Scalar> betas) {
    return {MetricMode::PerMode, std::move(alphas), std::move(betas)};
  }

  static MetricParams continuous(Scalar alpha, Scalar beta) {
    return {MetricMode::ContinuousForm, Vector<Scalar>::Constant(1, alpha), Vector<Scalar>::Constant(1, beta)};
  }

  /// alpha_i = 1, beta_i = 0: Theta = I (+) K.
  static MetricParams identity(int n) {
    return per_mode(Vector<Scalar>::Ones(n), Vector<Scalar>::Zero(n));
  }

  /// Weights of the positive and negative branch projectors:
  /// alpha = w+ + w-, beta = w+ - w-. Positive definite when both weights are.
  static MetricParams from_branch_weights(Scalar weight_plus, Scalar weight_minus) {
    return continuous(weight_plus + weight_minus, weight_plus - weight_minus);
  }

  void validate(Eigen::Index n) const {
    const Eigen::Index expected = mode == MetricMode::PerMode ? n : 1;
    require_dimension(alphas.size() == expected && betas.size() == expected,
                      std::string("metric params: ") + to_string(mode) + " mode expects " +
                          std::to_string(expected) + " alphas and betas, got " + std::to_string(alphas.size()) +
                          " and " + std::to_string(betas.size()));
  }

  /// Same member for an n-mode spectrum. Per-mode params whose entries are
  /// all equal are replicated to length n; anything else must already fit.
  MetricParams broadcast(Eigen::Index n) const {
    if (mode == MetricMode::ContinuousForm || alphas.size() == n) return *this;
    const bool uniform = alphas.size() > 0 && alphas.size() == betas.size() &&
                         (alphas.array() == alphas(0)).all() && (betas.array() == betas(0)).all();
    if (!uniform)
      throw DimensionMismatch("metric params: " + std::to_string(alphas.size()) + " per-mode entries for " +
                              std::to_string(n) + " modes");
    return per_mode(Vector<Scalar>::Constant(n, alphas(0)), Vector<Scalar>::Constant(n, betas(0)));
  }

  Scalar alpha(Eigen::Index i) const { return mode == MetricMode::PerMode ? alphas(i) : alphas(0); }

  /// Off-diagonal block entry c_i for a mode with kinetic eigenvalue a.
  Scalar coupling(Eigen::Index i, Scalar a) const {
    return mode == MetricMode::PerMode ? betas(i) : betas(0) * std::sqrt(a);
  }
};

template <typename Scalar = double>
struct MetricOperator {
  Matrix<Scalar> theta;
  Matrix<Scalar> omega;          // symmetric positive square root of theta; empty unless positive
  Matrix<Scalar> omega_inverse;  // empty unless positive
  Basis basis = Basis::KineticEigenbasis;
  bool positive = false;

  Eigen::Index n() const { return theta.rows() / 2; }
};

namespace detail {

// Theta^{1/2} and Theta^{-1/2} from a symmetric eigensolve.
template <typename Scalar>
void attach_square_root(MetricOperator<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(m.theta);
  if (solver.info() != Eigen::Success || !(solver.eigenvalues().minCoeff() > 0)) {
    m.positive = false;
    return;
  }
  const Vector<Scalar> root = solver.eigenvalues().cwiseSqrt();
  const auto& w = solver.eigenvectors();
  m.omega = w * root.asDiagonal() * w.transpose();
  m.omega_inverse = w * root.cwiseInverse().asDiagonal() * w.transpose();
  // Symmetrize away the rounding of the two products.
  m.omega = (Scalar(0.5) * (m.omega + m.omega.transpose())).eval();
  m.omega_inverse = (Scalar(0.5) * (m.omega_inverse + m.omega_inverse.transpose())).eval();
}

template <typename Scalar>
bool cholesky_succeeds(const Matrix<Scalar>& theta) {
  Eigen::LLT<Matrix<Scalar>> llt(theta);
  return llt.info() == Eigen::Success;
}

}  // namespace detail

/// Member of the metric family in the kinetic eigenbasis. H^T Theta = Theta H
/// holds exactly in exact arithmetic for any params; positivity is decided
/// by a Cholesky attempt and, when it succeeds, Omega = Theta^{1/2} is cached.
///
/// With repeated kinetic eigenvalues this is the diagonal subfamily only;
/// block-coupled solutions inside degenerate eigenspaces are not generated.
template <typename Scalar>
MetricOperator<Scalar> solve_dieudonne(const KineticSpectrum<Scalar>& spectrum, const MetricParams<Scalar>& params) {
  detail::require_positive_spectrum(spectrum);
  const auto n = spectrum.size();
  params.validate(n);
  MetricOperator<Scalar> m;
  m.basis = Basis::KineticEigenbasis;
  m.theta = Matrix<Scalar>::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar a = spectrum.eigenvalues(i);
    const Scalar alpha = params.alpha(i);
    const Scalar c = params.coupling(i, a);
    m.theta(i, i) = alpha;
    m.theta(i, n + i) = c;
    m.theta(n + i, i) = c;
    m.theta(n + i, n + i) = a * alpha;
  }
  m.positive = detail::cholesky_succeeds(m.theta);
  if (m.positive) detail::attach_square_root(m);
  return m;
}

/// Rotates an eigenbasis metric to lattice sites: (V (+) V) Theta (V (+) V)^T.
template <typename Scalar>
MetricOperator<Scalar> metric_in_site_basis(const MetricOperator<Scalar>& m, const KineticSpectrum<Scalar>& spectrum) {
  if (m.basis != Basis::KineticEigenbasis) throw BasisMismatch("metric_in_site_basis: metric is already in site basis");
  require_dimension(m.n() == spectrum.size(), "metric_in_site_basis: metric and spectrum sizes differ");
  const Matrix<Scalar> r = block_rotation(spectrum);
  MetricOperator<Scalar> out;
  out.basis = Basis::Site;
  out.positive = m.positive;
  out.theta = r * m.theta * r.transpose();
  out.theta = (Scalar(0.5) * (out.theta + out.theta.transpose())).eval();
  if (m.positive) {
    out.omega = r * m.omega * r.transpose();
    out.omega_inverse = r * m.omega_inverse * r.transpose();
  }
  return out;
}

enum class Verdict { Positive, Negative, Indeterminate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Positive: return "positive";
    case Verdict::Negative: return "negative";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

struct PositivityReport {
  std::vector<Verdict> per_mode;  // analytic verdict for each mode's 2x2 block
  Verdict analytic = Verdict::Positive;
  bool numerical = false;         // Cholesky of the assembled Theta succeeded
  bool agree = true;              // false only for a definite analytic verdict contradicted numerically
};

/// Analytic verdict for one mode: alpha > 0 and a alpha^2 > c^2, with
/// |a alpha^2 - c^2| <= 1e-10 max(1, a alpha^2) reported as Indeterminate.
template <typename Scalar>
Verdict mode_verdict(Scalar a, Scalar alpha, Scalar coupling) {
  if (!(alpha > 0)) return Verdict::Negative;
  const Scalar diag = a * alpha * alpha;
  const Scalar gap = diag - coupling * coupling;
  if (std::abs(gap) <= Scalar(1e-10) * std::max(Scalar(1), diag)) return Verdict::Indeterminate;
  return gap > 0 ? Verdict::Positive : Verdict::Negative;
}

template <typename Scalar>
PositivityReport check_positivity(const MetricParams<Scalar>& params, const KineticSpectrum<Scalar>& spectrum) {
  const auto n = spectrum.size();
  params.validate(n);
  PositivityReport report;
  bool any_negative = false, any_indeterminate = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar a = spectrum.eigenvalues(i);
    const Verdict v = mode_verdict(a, params.alpha(i), params.coupling(i, a));
    any_negative |= v == Verdict::Negative;
    any_indeterminate |= v == Verdict::Indeterminate;
    report.per_mode.push_back(v);
  }
  report.analytic = any_negative ? Verdict::Negative : any_indeterminate ? Verdict::Indeterminate : Verdict::Positive;
  report.numerical = solve_dieudonne(spectrum, params).positive;
  report.agree = report.analytic == Verdict::Indeterminate || (report.analytic == Verdict::Positive) == report.numerical;
  return report;
}

namespace detail {

template <typename Scalar>
void require_same_basis(const MetricOperator<Scalar>& m, const TwoComponentState<Scalar>& x,
                        const TwoComponentState<Scalar>& y) {
  require_dimension(x.n() == m.n() && y.n() == m.n(), "inner_product: state and metric dimensions differ");
  if (x.basis() != m.basis || y.basis() != m.basis)
    throw BasisMismatch(std::string("inner_product: metric is in ") + to_string(m.basis) + " basis, states in " +
                        to_string(x.basis()) + " and " + to_string(y.basis()));
}

}  // namespace detail

/// <<x|y>> = x^dagger Theta y (antilinear in x).
template <typename Scalar>
std::complex<Scalar> inner_product(const MetricOperator<Scalar>& m, const TwoComponentState<Scalar>& x,
                                   const TwoComponentState<Scalar>& y) {
  detail::require_same_basis(m, x, y);
  return x.data().dot(m.theta.template cast<std::complex<Scalar>>() * y.data());
}

/// The same inner product written as explicit sums over modes; only valid in
/// the kinetic eigenbasis where Theta is made of 2x2 mode blocks:
///   sum alpha_i x*_i y_i + sum c_i (x*_i y_{n+i} + x*_{n+i} y_i) + sum a_i alpha_i x*_{n+i} y_{n+i}
template <typename Scalar>
std::complex<Scalar> inner_product_mode_sums(const KineticSpectrum<Scalar>& spectrum,
                                             const MetricParams<Scalar>& params, const TwoComponentState<Scalar>& x,
                                             const TwoComponentState<Scalar>& y) {
  const auto n = spectrum.size();
  params.validate(n);
  require_dimension(x.n() == n && y.n() == n, "inner_product_mode_sums: dimension mismatch");
  if (x.basis() != Basis::KineticEigenbasis || y.basis() != Basis::KineticEigenbasis)
    throw BasisMismatch("inner_product_mode_sums: states must be in the kinetic eigenbasis");
  std::complex<Scalar> diag_upper = 0, cross = 0, diag_lower = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar a = spectrum.eigenvalues(i);
    const Scalar alpha = params.alpha(i);
    const Scalar c = params.coupling(i, a);
    diag_upper += alpha * std::conj(x.data()(i)) * y.data()(i);
    cross += c * (std::conj(x.data()(i)) * y.data()(n + i) + std::conj(x.data()(n + i)) * y.data()(i));
    diag_lower += a * alpha * std::conj(x.data()(n + i)) * y.data()(n + i);
  }
  return diag_upper + cross + diag_lower;
}

/// Two-component state (i psi_dot ; psi) in site coordinates.
template <typename Scalar>
TwoComponentState<Scalar> state_from_wavefunction(const ComplexVector<Scalar>& psi,
                                                  const ComplexVector<Scalar>& psi_dot) {
  require_dimension(psi.size() == psi_dot.size(), "state_from_wavefunction: dimension mismatch");
  return TwoComponentState<Scalar>(ComplexVector<Scalar>(std::complex<Scalar>(0, 1) * psi_dot), psi, Basis::Site);
}

/// Inner product written through the field and its time derivative,
///   alpha (<psi|K|phi> + <psi_dot|phi_dot>) + i beta (<psi|K^{1/2}|phi_dot> - <psi_dot|K^{1/2}|phi>),
/// with K and K^{1/2} applied through the kinetic spectrum. All vectors are
/// in site coordinates.
template <typename Scalar>
std::complex<Scalar> inner_product_wavefunction_form(Scalar alpha, Scalar beta, const ComplexVector<Scalar>& psi,
                                                     const ComplexVector<Scalar>& psi_dot,
                                                     const ComplexVector<Scalar>& phi,
                                                     const ComplexVector<Scalar>& phi_dot,
                                                     const KineticSpectrum<Scalar>& spectrum) {
  const auto n = spectrum.size();
  require_dimension(psi.size() == n && psi_dot.size() == n && phi.size() == n && phi_dot.size() == n,
                    "inner_product_wavefunction_form: dimension mismatch");
  using C = std::complex<Scalar>;
  const Matrix<C> v = spectrum.eigenvectors.template cast<C>();
  const Vector<C> a = spectrum.eigenvalues.template cast<C>();
  const Vector<C> root = spectrum.eigenvalues.cwiseSqrt().template cast<C>();
  auto apply = [&](const Vector<C>& weights, const ComplexVector<Scalar>& x) -> ComplexVector<Scalar> {
    return v * weights.cwiseProduct(v.transpose() * x);
  };
  const C kinetic_term = psi.dot(apply(a, phi));
  const C velocity_term = psi_dot.dot(phi_dot);
  const C mixed = psi.dot(apply(root, phi_dot)) - psi_dot.dot(apply(root, phi));
  return alpha * (kinetic_term + velocity_term) + C(0, 1) * beta * mixed;
}

/// ||H^T Theta - Theta H||_max / (||H||_max ||Theta||_max).
template <typename DerivedH, typename DerivedT>
typename DerivedH::Scalar dieudonne_residual(const Eigen::MatrixBase<DerivedH>& hamiltonian,
                                             const Eigen::MatrixBase<DerivedT>& theta) {
  using Scalar = typename DerivedH::Scalar;
  require_dimension(hamiltonian.rows() == hamiltonian.cols() && theta.rows() == theta.cols() &&
                        hamiltonian.rows() == theta.rows(),
                    "dieudonne_residual: shapes differ");
  const Scalar scale = max_abs(hamiltonian) * max_abs(theta);
  if (scale == 0) return 0;
  const Matrix<Scalar> lhs = hamiltonian.transpose() * theta;
  const Matrix<Scalar> rhs = theta * hamiltonian;
  return max_abs(lhs - rhs) / scale;
}

/// Kinetic operator expressed in the basis the metric lives in.
template <typename Scalar>
Matrix<Scalar> kinetic_in_basis(const KineticSpectrum<Scalar>& spectrum, Basis basis) {
  if (basis == Basis::KineticEigenbasis) return spectrum.eigenvalues.asDiagonal();
  return spectrum.kinetic();
}

/// Omega with Omega^T Omega = Theta, chosen as the symmetric positive square root.
/// Any U Omega with U orthogonal factors Theta equally well.
template <typename Scalar>
const Matrix<Scalar>& factorize_omega(const MetricOperator<Scalar>& m) {
  if (!m.positive || m.omega.size() == 0) throw NotPositive("factorize_omega: metric is not positive definite");
  return m.omega;
}

/// Ratio of extreme eigenvalues of Theta; infinity when Theta is not positive.
template <typename Scalar>
Scalar theta_condition_number(const MetricOperator<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(m.theta, Eigen::EigenvaluesOnly);
  const Scalar lo = solver.eigenvalues().minCoeff();
  const Scalar hi = solver.eigenvalues().maxCoeff();
  if (!(lo > 0)) return std::numeric_limits<Scalar>::infinity();
  return hi / lo;
}

/// h = Omega H Omega^{-1} with H = [[0, K], [I, 0]]; K must be given in the
/// metric's basis. Symmetric up to rounding, with the spectrum of H.
template <typename Derived, typename Scalar>
Matrix<Scalar> hermitize(const Eigen::MatrixBase<Derived>& k, const MetricOperator<Scalar>& m) {
  const Matrix<Scalar>& omega = factorize_omega(m);
  require_dimension(k.rows() == m.n() && k.cols() == m.n(), "hermitize: K and metric dimensions differ");
  if (std::sqrt(theta_condition_number(m)) > Scalar(1e12))
    throw IllConditioned("hermitize: Omega condition number exceeds 1e12");
  return omega * build_hamiltonian(k) * m.omega_inverse;
}

template <typename Scalar>
Matrix<Scalar> hermitize(const KineticSpectrum<Scalar>& spectrum, const MetricOperator<Scalar>& m) {
  return hermitize(kinetic_in_basis(spectrum, m.basis), m);
}

/// A vector with <<x|x>> <= 0 when Theta is not positive definite: the
/// eigenvector of its smallest eigenvalue. Empty when Theta is positive.
template <typename Scalar>
std::optional<Vector<Scalar>> negative_norm_witness(const MetricOperator<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(m.theta);
  Eigen::Index idx = 0;
  if (solver.eigenvalues().minCoeff(&idx) > 0) return std::nullopt;
  return Vector<Scalar>(solver.eigenvectors().col(idx));
}

/// Adds the condition number of the given metric at every level. The growth
/// with n is the finite-dimensional trace of the unbounded continuum metric.
inline ConvergenceReport convergence_study(double box_length, double mass, const std::vector<int>& levels,
                                           const MetricParams<double>& params, int modes = 3) {
  ConvergenceReport report = convergence_study(box_length, mass, levels, modes);
  for (auto& level : report.levels) {
    LatticeConfig<double> cfg{level.n, level.h, mass, BoundaryCondition::Dirichlet};
    const auto spectrum = kinetic_spectrum(cfg);
    level.theta_condition_number = theta_condition_number(solve_dieudonne(spectrum, params.broadcast(level.n)));
  }
  return report;
}

}  // namespace kleinmetric

#endif  // KLEINMETRIC_METRIC_HPP
