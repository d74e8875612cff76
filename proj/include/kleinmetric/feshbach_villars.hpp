#ifndef KLEINMETRIC_FESHBACH_VILLARS_HPP
#define KLEINMETRIC_FESHBACH_VILLARS_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "kleinmetric/common.hpp"
#include "kleinmetric/lattice.hpp"

namespace kleinmetric {

/// Two-component Klein-Gordon state (i d/dt psi ; psi) stored as one
/// 2n-vector: entries [0, n) are the upper component, [n, 2n) the lower.
template <typename Scalar = double>
class TwoComponentState {
 public:
  using Complex = std::complex<Scalar>;

  TwoComponentState() = default;

  explicit TwoComponentState(ComplexVector<Scalar> data, Basis basis = Basis::Site)
      : data_(std::move(data)), basis_(basis) {
    require_dimension(data_.size() % 2 == 0 && data_.size() > 0,
                      "TwoComponentState: length must be a positive even number");
  }

  template <typename UpperDerived, typename LowerDerived>
  TwoComponentState(const Eigen::MatrixBase<UpperDerived>& upper, const Eigen::MatrixBase<LowerDerived>& lower,
                    Basis basis = Basis::Site)
      : basis_(basis) {
    require_dimension(upper.size() == lower.size() && upper.size() > 0,
                      "TwoComponentState: components must have equal nonzero length");
    data_.resize(2 * upper.size());
    data_.head(upper.size()) = upper.template cast<Complex>();
    data_.tail(lower.size()) = lower.template cast<Complex>();
  }

  Eigen::Index n() const { return data_.size() / 2; }
  Basis basis() const { return basis_; }

  const ComplexVector<Scalar>& data() const { return data_; }
  ComplexVector<Scalar>& data() { return data_; }

  auto upper() const { return data_.head(n()); }
  auto upper() { return data_.head(n()); }
  auto lower() const { return data_.tail(n()); }
  auto lower() { return data_.tail(n()); }

 private:
  ComplexVector<Scalar> data_;
  Basis basis_ = Basis::Site;
};

/// Block rotation V (+) V between site basis and kinetic eigenbasis.
template <typename Scalar>
TwoComponentState<Scalar> to_basis(const TwoComponentState<Scalar>& state, Basis target,
                                   const KineticSpectrum<Scalar>& spectrum) {
  require_dimension(state.n() == spectrum.size(), "to_basis: state and spectrum sizes differ");
  if (state.basis() == target) return state;
  const auto& v = spectrum.eigenvectors;
  using C = std::complex<Scalar>;
  if (target == Basis::KineticEigenbasis) {
    return TwoComponentState<Scalar>(ComplexVector<Scalar>(v.transpose().template cast<C>() * state.upper()),
                                     ComplexVector<Scalar>(v.transpose().template cast<C>() * state.lower()), target);
  }
  return TwoComponentState<Scalar>(ComplexVector<Scalar>(v.template cast<C>() * state.upper()),
                                   ComplexVector<Scalar>(v.template cast<C>() * state.lower()), target);
}

/// The 2n x 2n block V (+) V.
template <typename Scalar>
Matrix<Scalar> block_rotation(const KineticSpectrum<Scalar>& spectrum) {
  const auto n = spectrum.size();
  Matrix<Scalar> r = Matrix<Scalar>::Zero(2 * n, 2 * n);
  r.topLeftCorner(n, n) = spectrum.eigenvectors;
  r.bottomRightCorner(n, n) = spectrum.eigenvectors;
  return r;
}

/// H = [[0, K], [I, 0]].
template <typename Derived>
Matrix<typename Derived::Scalar> build_hamiltonian(const Eigen::MatrixBase<Derived>& k) {
  using Scalar = typename Derived::Scalar;
  require_dimension(k.rows() == k.cols(), "build_hamiltonian: K must be square");
  const auto n = k.rows();
  Matrix<Scalar> h = Matrix<Scalar>::Zero(2 * n, 2 * n);
  h.topRightCorner(n, n) = k;
  h.bottomLeftCorner(n, n).setIdentity();
  return h;
}

/// H applied blockwise: (K lower ; upper), without forming H.
template <typename Derived, typename Scalar>
TwoComponentState<Scalar> apply_hamiltonian(const Eigen::MatrixBase<Derived>& k,
                                            const TwoComponentState<Scalar>& state) {
  require_dimension(k.rows() == k.cols() && k.rows() == state.n(),
                    "apply_hamiltonian: K and state dimensions differ");
  using C = std::complex<Scalar>;
  return TwoComponentState<Scalar>(ComplexVector<Scalar>(k.template cast<C>() * state.lower()),
                                   ComplexVector<Scalar>(state.upper()), state.basis());
}

/// One eigenpair of H with its partner eigenvector of H^T.
///   vector         = ( sign sqrt(a) psi ; psi )
///   adjoint_vector = ( psi ; sign sqrt(a) psi )
template <typename Scalar = double>
struct FVEigenpair {
  Scalar energy = 0;
  int sign = 1;
  int mode = 0;  // 0-based index into the kinetic spectrum
  Vector<Scalar> vector;
  Vector<Scalar> adjoint_vector;
};

namespace detail {

template <typename Scalar>
void require_positive_spectrum(const KineticSpectrum<Scalar>& spectrum) {
  if (spectrum.size() == 0) throw ConfigError("empty kinetic spectrum");
  if (!(spectrum.eigenvalues.minCoeff() > 0))
    throw NonPositiveSpectrum("kinetic spectrum has a non-positive eigenvalue; energies would not be real");
}

template <typename Scalar>
Vector<Scalar> stack(const Vector<Scalar>& top, const Vector<Scalar>& bottom) {
  Vector<Scalar> out(top.size() + bottom.size());
  out << top, bottom;
  return out;
}

}  // namespace detail

/// All 2n eigenpairs of H in the site basis, sorted by ascending energy
/// (negative branch first). Energies are +/- sqrt of the kinetic eigenvalues.
template <typename Scalar>
std::vector<FVEigenpair<Scalar>> fv_eigenpairs(const KineticSpectrum<Scalar>& spectrum) {
  detail::require_positive_spectrum(spectrum);
  const int n = spectrum.size();
  std::vector<FVEigenpair<Scalar>> pairs;
  pairs.reserve(2 * n);
  // Ascending a_j gives descending -sqrt(a_j): walk the negative branch backwards.
  for (int j = n - 1; j >= 0; --j) {
    const Scalar e = std::sqrt(spectrum.eigenvalues(j));
    const Vector<Scalar> psi = spectrum.eigenvectors.col(j);
    pairs.push_back({-e, -1, j, detail::stack<Scalar>(-e * psi, psi), detail::stack<Scalar>(psi, -e * psi)});
  }
  for (int j = 0; j < n; ++j) {
    const Scalar e = std::sqrt(spectrum.eigenvalues(j));
    const Vector<Scalar> psi = spectrum.eigenvectors.col(j);
    pairs.push_back({e, 1, j, detail::stack<Scalar>(e * psi, psi), detail::stack<Scalar>(psi, e * psi)});
  }
  return pairs;
}

/// Eigenvectors of H^T, in the same order as fv_eigenpairs.
template <typename Scalar>
std::vector<Vector<Scalar>> adjoint_eigenvectors(const KineticSpectrum<Scalar>& spectrum) {
  std::vector<Vector<Scalar>> out;
  for (auto& p : fv_eigenpairs(spectrum)) out.push_back(std::move(p.adjoint_vector));
  return out;
}

/// Largest |<Phi_m|Psi_n> - delta_mn 2 E_n| over all pairs.
template <typename Scalar>
Scalar biorthogonality_check(const std::vector<FVEigenpair<Scalar>>& pairs) {
  Scalar worst = 0;
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    for (std::size_t n = 0; n < pairs.size(); ++n) {
      const Scalar overlap = pairs[m].adjoint_vector.dot(pairs[n].vector);
      const Scalar expected = m == n ? Scalar(2) * pairs[n].energy : Scalar(0);
      worst = std::max(worst, std::abs(overlap - expected));
    }
  }
  return worst;
}

/// sum |Psi_n><Phi_n| / (2 E_n), which equals the identity for a complete set.
template <typename Scalar>
Matrix<Scalar> biorthogonal_resolution(const std::vector<FVEigenpair<Scalar>>& pairs) {
  if (pairs.empty()) return {};
  const auto dim = pairs.front().vector.size();
  Matrix<Scalar> sum = Matrix<Scalar>::Zero(dim, dim);
  for (const auto& p : pairs) sum.noalias() += p.vector * p.adjoint_vector.transpose() / (Scalar(2) * p.energy);
  return sum;
}

}  // namespace kleinmetric

#endif  // KLEINMETRIC_FESHBACH_VILLARS_HPP
