#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kleinmetric/lattice.hpp"
#include "oracles.hpp"

using namespace kleinmetric;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

LatticeConfig<double> dirichlet(int n, double h, double m = 0) { return {n, h, m, BoundaryCondition::Dirichlet}; }
LatticeConfig<double> periodic(int n, double h, double m) { return {n, h, m, BoundaryCondition::Periodic}; }

}  // namespace

TEST_CASE("build_laplacian: stencil examples") {
  MatrixXd expected2(2, 2);
  expected2 << 2, -1, -1, 2;
  CHECK(build_laplacian(dirichlet(2, 1.0)) == expected2);

  CHECK(build_laplacian(dirichlet(1, 1.0)) == MatrixXd::Constant(1, 1, 2.0));

  MatrixXd expected3(3, 3);
  expected3 << 8, -4, 0, -4, 8, -4, 0, -4, 8;
  CHECK(build_laplacian(dirichlet(3, 0.5)) == expected3);
}

TEST_CASE("build_laplacian agrees with the pointwise second difference") {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.integer(1, 12);
    const double h = rng.uniform(0.05, 2.0);
    const bool ring = n > 2 && trial % 2 == 0;
    const auto cfg = ring ? periodic(n, h, 1.0) : dirichlet(n, h);
    const VectorXd u = rng.vector(n);
    const VectorXd expected = oracle::second_difference(u, h, ring);
    CHECK((build_laplacian(cfg) * u - expected).cwiseAbs().maxCoeff() <= 1e-12 * (1 + expected.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("build_laplacian is bit-symmetric for every configuration") {
  for (int n = 1; n <= 9; ++n) {
    for (double h : {0.1, 0.3, 1.0, 1.7}) {
      const auto lap_d = build_laplacian(dirichlet(n, h));
      const auto lap_p = build_laplacian(periodic(n, h, 0.5));
      CHECK(lap_d == lap_d.transpose());
      CHECK(lap_p == lap_p.transpose());
    }
  }
}

TEST_CASE("periodic stencil adds corner couplings") {
  const auto lap = build_laplacian(periodic(4, 1.0, 1.0));
  CHECK(lap(0, 3) == -1.0);
  CHECK(lap(3, 0) == -1.0);
  CHECK(lap(0, 0) == 2.0);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(build_laplacian(dirichlet(0, 1.0)), ConfigError);
  CHECK_THROWS_AS(build_laplacian(dirichlet(3, 0.0)), ConfigError);
  CHECK_THROWS_AS(build_laplacian(dirichlet(3, -1.0)), ConfigError);
  CHECK_THROWS_AS(build_kinetic(periodic(4, 1.0, 0.0)), ConfigError);
  CHECK_THROWS_AS(build_kinetic(dirichlet(3, 1.0, -1.0)), ConfigError);
}

TEST_CASE("build_kinetic examples") {
  MatrixXd k(2, 2);
  k << 2, -1, -1, 2;
  CHECK(build_kinetic(dirichlet(2, 1.0, 0.0)) == k);
  k << 3, -1, -1, 3;
  CHECK(build_kinetic(dirichlet(2, 1.0, 1.0)) == k);
  CHECK(build_kinetic(dirichlet(1, 1.0, 2.0)) == MatrixXd::Constant(1, 1, 6.0));
}

TEST_CASE("eigendecompose examples") {
  MatrixXd k(2, 2);
  k << 2, -1, -1, 2;
  auto s = eigendecompose(k);
  const auto [lo, hi] = oracle::symmetric_2x2_eigenvalues(2, -1, 2);
  CHECK(s.eigenvalues(0) == doctest::Approx(lo).epsilon(1e-14));
  CHECK(s.eigenvalues(1) == doctest::Approx(hi).epsilon(1e-14));
  CHECK(lo == doctest::Approx(1.0));
  CHECK(hi == doctest::Approx(3.0));

  s = eigendecompose(MatrixXd::Constant(1, 1, 6.0));
  CHECK(s.eigenvalues(0) == 6.0);
  CHECK(s.eigenvectors(0, 0) == 1.0);

  k << 3, -1, -1, 3;
  s = eigendecompose(k);
  CHECK(s.eigenvalues(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s.eigenvalues(1) == doctest::Approx(4.0).epsilon(1e-14));
  const double r = 1 / std::sqrt(2.0);
  CHECK(s.eigenvectors(0, 0) == doctest::Approx(r));
  CHECK(s.eigenvectors(1, 0) == doctest::Approx(r));
  CHECK(s.eigenvectors(0, 1) == doctest::Approx(r));
  CHECK(s.eigenvectors(1, 1) == doctest::Approx(-r));
}

TEST_CASE("eigendecompose rejects non-positive spectra") {
  MatrixXd k(2, 2);
  k << 1, 1, 1, 1;  // eigenvalues 0, 2
  CHECK_THROWS_AS(eigendecompose(k), NonPositiveSpectrum);
  k << 1, 2, 2, 1;  // eigenvalues -1, 3
  CHECK_THROWS_AS(eigendecompose(k), NonPositiveSpectrum);
  // Periodic massless ring has the zero Fourier mode.
  LatticeConfig<double> ring{6, 1.0, 0.0, BoundaryCondition::Periodic};
  CHECK_THROWS_AS(eigendecompose(build_laplacian(ring)), NonPositiveSpectrum);
}

TEST_CASE("eigendecompose: orthonormality, residual, sign convention") {
  for (int n : {1, 2, 5, 16, 40}) {
    for (const auto& cfg : {dirichlet(n, 0.7, 0.3), periodic(std::max(n, 3), 0.4, 1.2)}) {
      const MatrixXd k = build_kinetic(cfg);
      const auto s = eigendecompose(k);
      const auto dim = k.rows();
      const MatrixXd gram = s.eigenvectors.transpose() * s.eigenvectors - MatrixXd::Identity(dim, dim);
      CHECK(gram.cwiseAbs().maxCoeff() <= dim * 1e-12);
      const MatrixXd residual = k * s.eigenvectors - s.eigenvectors * s.eigenvalues.asDiagonal();
      CHECK(residual.cwiseAbs().maxCoeff() <= dim * 1e-10 * k.cwiseAbs().maxCoeff());
      for (Eigen::Index j = 1; j < dim; ++j) CHECK(s.eigenvalues(j) >= s.eigenvalues(j - 1));
      for (Eigen::Index j = 0; j < dim; ++j) {
        for (Eigen::Index i = 0; i < dim; ++i) {
          if (std::abs(s.eigenvectors(i, j)) > 1e-12) {
            CHECK(s.eigenvectors(i, j) > 0);
            break;
          }
        }
      }
    }
  }
}

TEST_CASE("eigendecompose is deterministic") {
  const MatrixXd k = build_kinetic(dirichlet(30, 0.2, 1.0));
  const auto a = eigendecompose(k);
  const auto b = eigendecompose(k);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.eigenvectors == b.eigenvectors);
}

TEST_CASE("dirichlet_eigenvalue_exact examples and errors") {
  CHECK(dirichlet_eigenvalue_exact(1, dirichlet(2, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dirichlet_eigenvalue_exact(2, dirichlet(2, 1.0)) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(dirichlet_eigenvalue_exact(1, dirichlet(1, 1.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(dirichlet_eigenvalue_exact(0, dirichlet(2, 1.0)), ConfigError);
  CHECK_THROWS_AS(dirichlet_eigenvalue_exact(3, dirichlet(2, 1.0)), ConfigError);
  CHECK_THROWS_AS(dirichlet_eigenvalue_exact(1, periodic(4, 1.0, 1.0)), ConfigError);
}

TEST_CASE("Dirichlet spectrum matches the closed form and its lower bound") {
  for (int n : {1, 3, 10, 50, 120}) {
    for (double m : {0.0, 0.5, 2.0}) {
      const auto cfg = dirichlet(n, 1.0 / (n + 1), m);
      const auto s = kinetic_spectrum(cfg);
      const double bound = m * m + (2 - 2 * std::cos(std::numbers::pi / (n + 1))) / (cfg.h * cfg.h);
      CHECK(s.eigenvalues(0) >= bound * (1 - 1e-10));
      CHECK(s.eigenvalues(0) > m * m);
      for (int j = 1; j <= n; ++j) {
        const double exact = dirichlet_eigenvalue_exact(j, cfg);
        CHECK(std::abs(s.eigenvalues(j - 1) - exact) <= 1e-10 * exact);
      }
    }
  }
}

TEST_CASE("periodic spectrum bottoms out at m^2") {
  for (int n : {3, 8, 33}) {
    for (double m : {0.25, 1.0, 3.0}) {
      const auto s = kinetic_spectrum(periodic(n, 0.3, m));
      CHECK(std::abs(s.eigenvalues(0) - m * m) <= 1e-10 * m * m);
    }
  }
}

TEST_CASE("continuum_dispersion") {
  auto [p0, m0] = continuum_dispersion(0.0, 0.0);
  CHECK(p0 == 0.0);
  CHECK(m0 == 0.0);
  auto [p, q] = continuum_dispersion(3.0, 4.0);
  CHECK(p == 5.0);
  CHECK(q == -5.0);
  CHECK(p * p == 3.0 * 3.0 + 4.0 * 4.0);
  auto [r, s] = continuum_dispersion(0.0, 1.0);
  CHECK(r == 1.0);
  CHECK(s == -1.0);
}

TEST_CASE("convergence_study: single level error and mass shift") {
  const auto report = convergence_study(std::numbers::pi, 0.0, {99});
  REQUIRE(report.levels.size() == 1);
  const auto& level = report.levels[0];
  CHECK(level.h == doctest::Approx(std::numbers::pi / 100));
  CHECK(level.targets[0] == doctest::Approx(1.0).epsilon(1e-15));
  // 1 - (4/h^2) sin^2(h/2) at h = pi/100, frozen from the closed form.
  CHECK(level.errors[0] == doctest::Approx(8.224399758216538e-05).epsilon(1e-6));
  CHECK(level.errors[0] <= level.h * level.h);

  const auto massive = convergence_study(std::numbers::pi, 2.0, {99});
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(massive.levels[0].targets[j] - level.targets[j] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(std::abs(massive.levels[0].eigenvalues[j] - level.eigenvalues[j] - 4.0) <= 1e-10);
  }
}

TEST_CASE("convergence_study: second-order fit") {
  const auto report = convergence_study(std::numbers::pi, 0.0, {9, 19, 39});
  // Least-squares slope of the closed-form errors, frozen: 1.99777546...
  CHECK(report.fitted_order == doctest::Approx(1.9977754612732592).epsilon(1e-6));
  CHECK(report.fitted_order >= 1.8);
  CHECK(report.fitted_order <= 2.2);
  for (const auto& level : report.levels) {
    // error <= C h^2 with C = 1/12 from the leading Taylor term, with slack
    CHECK(level.errors[0] <= 0.1 * level.h * level.h);
  }
}

TEST_CASE("convergence_study rejects bad levels") {
  CHECK_THROWS_AS(convergence_study(1.0, 0.0, {}), ConfigError);
  CHECK_THROWS_AS(convergence_study(1.0, 0.0, {9, 9}), ConfigError);
  CHECK_THROWS_AS(convergence_study(-1.0, 0.0, {9}), ConfigError);
}

TEST_CASE("long double instantiation") {
  LatticeConfig<long double> cfg{4, 0.5L, 1.0L, BoundaryCondition::Dirichlet};
  const auto s = kinetic_spectrum(cfg);
  for (int j = 1; j <= 4; ++j)
    CHECK(std::abs(s.eigenvalues(j - 1) - dirichlet_eigenvalue_exact(j, cfg)) <= 1e-15L * s.eigenvalues(j - 1));
}
