#ifndef KLEINMETRIC_EVOLUTION_HPP
#define KLEINMETRIC_EVOLUTION_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "kleinmetric/common.hpp"
#include "kleinmetric/feshbach_villars.hpp"
#include "kleinmetric/lattice.hpp"
#include "kleinmetric/metric.hpp"

namespace kleinmetric {

template <typename Scalar>
using ModePropagator = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

namespace detail {

// sin(E t) / E, with a Taylor fallback where E t is small enough to cancel.
template <typename Scalar>
Scalar sin_over_energy(Scalar energy, Scalar t) {
  const Scalar x = energy * t;
  if (std::abs(x) < Scalar(1e-4)) {
    const Scalar x2 = x * x;
    return t * (Scalar(1) - x2 / Scalar(6) * (Scalar(1) - x2 / Scalar(20)));
  }
  return std::sin(x) / energy;
}

}  // namespace detail

/// exp(-i t [[0, a], [1, 0]]). The block squares to a I, so with E = sqrt(a)
/// the exponential is cos(Et) I - i sin(Et)/E [[0, a], [1, 0]].
template <typename Scalar>
ModePropagator<Scalar> mode_propagator(Scalar a, Scalar t) {
  if (!(a > 0)) throw NonPositiveSpectrum("mode_propagator: kinetic eigenvalue must be positive");
  using C = std::complex<Scalar>;
  const Scalar e = std::sqrt(a);
  const Scalar c = std::cos(e * t);
  const Scalar s = detail::sin_over_energy(e, t);
  ModePropagator<Scalar> u;
  u << C(c, 0), C(0, -a * s),
       C(0, -s), C(c, 0);
  return u;
}

/// Full 2n x 2n propagator exp(-i H t) assembled from the mode blocks, in
/// the requested basis.
template <typename Scalar>
ComplexMatrix<Scalar> propagator(const KineticSpectrum<Scalar>& spectrum, Scalar t, Basis basis = Basis::Site) {
  detail::require_positive_spectrum(spectrum);
  const auto n = spectrum.size();
  ComplexMatrix<Scalar> u = ComplexMatrix<Scalar>::Zero(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto block = mode_propagator(spectrum.eigenvalues(j), t);
    u(j, j) = block(0, 0);
    u(j, n + j) = block(0, 1);
    u(n + j, j) = block(1, 0);
    u(n + j, n + j) = block(1, 1);
  }
  if (basis == Basis::KineticEigenbasis) return u;
  const ComplexMatrix<Scalar> r = block_rotation(spectrum).template cast<std::complex<Scalar>>();
  return r * u * r.transpose();
}

template <typename Scalar = double>
struct EvolutionPlan {
  std::vector<Scalar> times;
  KineticSpectrum<Scalar> spectrum;
  TwoComponentState<Scalar> initial;

  void validate() const {
    if (times.empty()) throw ConfigError("evolution: no time points");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw ConfigError("evolution: times must be strictly increasing");
    require_dimension(initial.n() == spectrum.size(), "evolution: initial state does not match the spectrum");
  }
};

/// Uniform grid of `steps + 1` times on [0, t_max]; a single point when t_max is 0.
template <typename Scalar>
std::vector<Scalar> time_grid(Scalar t_max, int steps) {
  if (!(t_max >= 0)) throw ConfigError("evolution: t_max must be non-negative");
  if (t_max == 0) return {Scalar(0)};
  if (steps < 1) throw ConfigError("evolution: steps must be >= 1");
  std::vector<Scalar> times(steps + 1);
  for (int k = 0; k <= steps; ++k) times[k] = t_max * Scalar(k) / Scalar(steps);
  return times;
}

/// Psi(t) for every plan time, in the basis of the initial state. Each mode
/// is propagated exactly; there is no time stepping. A time of exactly 0
/// returns the initial state unchanged.
template <typename Scalar>
std::vector<TwoComponentState<Scalar>> evolve(const EvolutionPlan<Scalar>& plan) {
  plan.validate();
  detail::require_positive_spectrum(plan.spectrum);
  const auto n = plan.spectrum.size();
  const Basis out_basis = plan.initial.basis();
  const auto modal = to_basis(plan.initial, Basis::KineticEigenbasis, plan.spectrum);

  std::vector<TwoComponentState<Scalar>> out;
  out.reserve(plan.times.size());
  for (const Scalar t : plan.times) {
    if (t == 0) {
      out.push_back(plan.initial);
      continue;
    }
    ComplexVector<Scalar> upper(n), lower(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto u = mode_propagator(plan.spectrum.eigenvalues(j), t);
      const auto x = modal.upper()(j);
      const auto y = modal.lower()(j);
      upper(j) = u(0, 0) * x + u(0, 1) * y;
      lower(j) = u(1, 0) * x + u(1, 1) * y;
    }
    out.push_back(to_basis(TwoComponentState<Scalar>(upper, lower, Basis::KineticEigenbasis), out_basis,
                           plan.spectrum));
  }
  return out;
}

template <typename Scalar = double>
struct NormHistory {
  std::vector<Scalar> times;
  std::vector<Scalar> theta_norm;  // <<Psi(t)|Psi(t)>>
  std::vector<Scalar> naive_norm;  // <Psi(t)|Psi(t)>

  static Scalar relative_spread(const std::vector<Scalar>& values) {
    if (values.empty()) return 0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const Scalar ref = std::abs(values.front());
    return ref == 0 ? *hi - *lo : (*hi - *lo) / ref;
  }

  Scalar theta_drift() const { return relative_spread(theta_norm); }
  Scalar naive_variation() const { return relative_spread(naive_norm); }
};

/// Both norms of Psi(t) along the plan. The metric norm is conserved for
/// every positive member of the family; the plain norm generally is not.
template <typename Scalar>
NormHistory<Scalar> norm_history(const EvolutionPlan<Scalar>& plan, const MetricOperator<Scalar>& metric) {
  if (!metric.positive) throw NotPositive("norm_history: metric is not positive definite");
  require_dimension(metric.n() == plan.spectrum.size(), "norm_history: metric and spectrum sizes differ");
  NormHistory<Scalar> history;
  history.times = plan.times;
  for (const auto& state : evolve(plan)) {
    const auto in_metric_basis = to_basis(state, metric.basis, plan.spectrum);
    history.theta_norm.push_back(std::real(inner_product(metric, in_metric_basis, in_metric_basis)));
    history.naive_norm.push_back(state.data().squaredNorm());
  }
  return history;
}

/// Scales `state` (any basis) to unit metric norm.
template <typename Scalar>
TwoComponentState<Scalar> normalize_to_metric(TwoComponentState<Scalar> state, const MetricOperator<Scalar>& metric,
                                              const KineticSpectrum<Scalar>& spectrum) {
  const auto probe = to_basis(state, metric.basis, spectrum);
  const Scalar norm = std::real(inner_product(metric, probe, probe));
  if (!(norm > 0)) throw NotPositive("state has non-positive metric norm");
  state.data() /= std::sqrt(norm);
  return state;
}

/// Psi^(sign) of kinetic mode `mode` (0-based), site basis, unnormalized.
template <typename Scalar>
TwoComponentState<Scalar> branch_eigenstate(const KineticSpectrum<Scalar>& spectrum, int mode, int sign) {
  detail::require_positive_spectrum(spectrum);
  if (mode < 0 || mode >= spectrum.size()) throw ConfigError("branch_eigenstate: mode index out of range");
  const Scalar e = Scalar(sign >= 0 ? 1 : -1) * std::sqrt(spectrum.eigenvalues(mode));
  const Vector<Scalar> psi = spectrum.eigenvectors.col(mode);
  return TwoComponentState<Scalar>(Vector<Scalar>(e * psi), psi, Basis::Site);
}

/// Psi^(+) + Psi^(-) of one mode: (0 ; 2 psi). Its plain norm oscillates
/// unless the mode's kinetic eigenvalue is 1.
template <typename Scalar>
TwoComponentState<Scalar> mixed_branch_state(const KineticSpectrum<Scalar>& spectrum, int mode) {
  auto plus = branch_eigenstate(spectrum, mode, +1);
  plus.data() += branch_eigenstate(spectrum, mode, -1).data();
  return plus;
}

/// Gaussian packet exp(-(x - x0)^2 / (2 sigma^2)) exp(i k0 x) in the lower
/// component, upper component K^{1/2} lower so that only positive-energy
/// modes are populated. Scaled to unit metric norm; returned in site basis.
template <typename Scalar>
TwoComponentState<Scalar> gaussian_packet(const LatticeConfig<Scalar>& cfg, Scalar x0, Scalar sigma, Scalar k0,
                                          const KineticSpectrum<Scalar>& spectrum,
                                          const MetricOperator<Scalar>& metric) {
  cfg.validate();
  require_dimension(spectrum.size() == cfg.n && metric.n() == cfg.n, "gaussian_packet: dimension mismatch");
  if (!(sigma >= cfg.h / 2)) throw ConfigError("gaussian_packet: sigma below h/2 cannot be resolved on the grid");
  if (!(x0 >= 0 && x0 <= cfg.extent())) throw ConfigError("gaussian_packet: x0 lies outside the grid");

  using C = std::complex<Scalar>;
  ComplexVector<Scalar> lower(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    const Scalar x = cfg.position(i);
    const Scalar d = (x - x0) / sigma;
    lower(i) = std::exp(Scalar(-0.5) * d * d) * std::polar(Scalar(1), k0 * x);
  }
  const ComplexVector<Scalar> upper = spectrum.kinetic_sqrt().template cast<C>() * lower;
  return normalize_to_metric(TwoComponentState<Scalar>(upper, lower, Basis::Site), metric, spectrum);
}

}  // namespace kleinmetric

#endif  // KLEINMETRIC_EVOLUTION_HPP
