#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "comsense/model.hpp"
#include "comsense/spectral.hpp"
#include "oracle.hpp"

using namespace comsense;
using doctest::Approx;

namespace {

Eigen::VectorXd interior_eigenvalues(const FockOperator& h, int count) {
  const HermitianSpectrum spec(h.matrix());
  return spec.values().head(count);
}

double max_gap_error(const FockOperator& h, double expected, int gaps) {
  const Eigen::VectorXd e = interior_eigenvalues(h, gaps + 1);
  double worst = 0.0;
  for (int k = 0; k < gaps; ++k) worst = std::max(worst, std::abs((e[k + 1] - e[k]) - expected));
  return worst;
}

PhysicalParams weak_drive(double g, double eps) {
  PhysicalParams p;
  p.omega_m = 1.0;
  p.omega_c = 110.0;
  p.omega_l = 100.0;
  p.g = g;
  p.eps_l = eps;
  p.gamma_c = 1.0;
  p.gamma_m = 0.01;
  return p;
}

}  // namespace

TEST_CASE("steady state decoupled and undriven limits") {
  PhysicalParams p = weak_drive(0.0, 3.0);
  const SteadyState ss = steady_state(p);
  const cplx expected = p.eps_l / cplx(p.gamma_c / 2.0, p.delta());
  CHECK(std::abs(ss.mean_a - expected) <= 1e-12);
  CHECK(std::abs(ss.mean_b) == 0.0);

  p = weak_drive(0.01, 0.0);
  const SteadyState zero = steady_state(p);
  CHECK(std::abs(zero.mean_a) == 0.0);
  CHECK(std::abs(zero.mean_b) == 0.0);
}

TEST_CASE("steady state residual on a weak-drive grid") {
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const PhysicalParams p = weak_drive(1e-3 * (1 + i), 2.0 + 4.0 * j);
      const SteadyState ss = steady_state(p);
      worst = std::max(worst, steady_state_residual(p, ss.mean_a, ss.mean_b));
      CHECK_FALSE(ss.multistability_warning);
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("steady state non-convergence carries the last iterate") {
  SteadyStateOptions opt;
  opt.max_iter = 3;
  try {
    steady_state(weak_drive(0.005, 20.0), opt);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.code() == ErrorCode::Divergence);
    CHECK(e.last_iterate().iterations > 0);
  }
}

TEST_CASE("effective parameters") {
  const EffectiveParams a = effective_params(0.9, 100.0);
  CHECK(a.G == Approx(0.45 * std::sqrt(100.0)));
  CHECK(2.0 * a.G / std::sqrt(a.Delta * a.omega_m) == Approx(0.9));
  CHECK(a.Lambda == Approx(0.76));

  const EffectiveParams b = effective_params(0.6, kInfinity);
  CHECK(b.eps_np.real() == Approx(0.8).epsilon(1e-15));
  CHECK(b.eps_np_real());
  CHECK(b.r_np == Approx(std::log(0.64) / 4.0).epsilon(1e-15));
  CHECK(b.r_np == Approx(-0.11157).epsilon(1e-4));
  CHECK(b.E_np == Approx(-0.1));

  const EffectiveParams c = effective_params(1.2, kInfinity);
  CHECK_FALSE(c.eps_np_real());
  CHECK(c.eps_np.imag() == Approx(std::sqrt(0.44)));
  CHECK(std::isnan(c.E_np));

  CHECK_THROWS_AS(effective_params(0.5, 0.0), Error);
  CHECK_THROWS_AS(effective_params(0.5, -3.0), Error);
}

TEST_CASE("effective parameters from a physical steady state") {
  const PhysicalParams p = weak_drive(0.004, 30.0);
  const SteadyState ss = steady_state(p);
  const EffectiveParams ep = effective_params(p, ss);
  CHECK(ep.Delta == Approx(p.delta() - 2.0 * p.g * ss.mean_b.real()).epsilon(1e-14));
  CHECK(ep.G == Approx(p.g * std::abs(ss.mean_a)).epsilon(1e-14));
  CHECK(ep.lambda == Approx(2.0 * ep.G / std::sqrt(ep.Delta)).epsilon(1e-14));

  PhysicalParams bad = weak_drive(0.004, 30.0);
  bad.omega_l = 120.0;
  const SteadyState ss_bad = steady_state(bad);
  try {
    effective_params(bad, ss_bad);
    FAIL("expected invalid regime");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidRegime);
  }
}

TEST_CASE("phase classification") {
  CHECK(classify_phase(0.98) == Phase::stable);
  CHECK(classify_phase(1.0) == Phase::critical);
  CHECK(classify_phase(1.2) == Phase::unstable);
  CHECK(phase_name(Phase::unstable) == "unstable");
}

TEST_CASE("effective Hamiltonian spectrum") {
  const Eigen::VectorXd free = interior_eigenvalues(hamiltonian_effective(0.0, 30), 10);
  for (int k = 0; k < 10; ++k) CHECK(free[k] == Approx(double(k)).epsilon(1e-13));

  CHECK(max_gap_error(hamiltonian_effective(0.6, 120), 0.8, 5) <= 0.8e-8);
  CHECK(max_gap_error(hamiltonian_effective(0.98, 400), std::sqrt(1 - 0.98 * 0.98), 5) <= 1e-8);
  CHECK(std::sqrt(1 - 0.98 * 0.98) == Approx(0.19900).epsilon(1e-4));

  const FockOperator hq = hamiltonian_effective_quadrature(0.6, 120);
  const FockOperator hz = hamiltonian_effective(0.6, 120, true);
  CHECK(interior_block(hq - hz).norm() <= 1e-10);
}

TEST_CASE("squeezing diagonalizes the effective Hamiltonian") {
  const int n = 120;
  const double lambda = 0.6;
  const EffectiveParams ep = effective_params(lambda, kInfinity);
  const Matrix s = squeeze_matrix(ep.diagonalizing_squeeze(), n).matrix();
  const Matrix h = hamiltonian_effective(lambda, n).matrix();
  const Matrix t = s.adjoint() * h * s;
  const Matrix block = interior_block(FockOperator(FockShape::single(n), t), 0.5);
  const Matrix off = block - Matrix(block.diagonal().asDiagonal());
  CHECK(off.norm() / block.norm() <= 1e-8);

  const Matrix wrong = squeeze_matrix(ep.r_np, n).matrix();
  const Matrix tw = wrong.adjoint() * h * wrong;
  const Matrix bw = interior_block(FockOperator(FockShape::single(n), tw), 0.5);
  CHECK((bw - Matrix(bw.diagonal().asDiagonal())).norm() / bw.norm() > 1e-3);
}

TEST_CASE("linearized two-mode Hamiltonian") {
  EffectiveParams ep = effective_params(0.0, 20.0);
  const FockOperator h = hamiltonian_linearized(ep, 4, 6);
  const HermitianSpectrum spec(h.matrix());
  CHECK(std::abs(spec.values()[0]) <= 1e-13);
  for (Eigen::Index i = 0; i < h.matrix().rows(); ++i) {
    for (Eigen::Index j = 0; j < h.matrix().cols(); ++j) {
      if (i != j) CHECK(std::abs(h.matrix()(i, j)) == 0.0);
    }
  }
  CHECK_THROWS_AS(hamiltonian_linearized(0.5, kInfinity, 4, 6), Error);
}

TEST_CASE("corrected Hamiltonian without finite-eta terms is the effective model plus cavity") {
  const int na = 3, nb = 10;
  const FockOperator hc = hamiltonian_corrected(0.7, 50.0, na, nb, false);
  const FockOperator ref = tensor(50.0 * number_operator(na), identity(nb)) +
                           tensor(identity(na), hamiltonian_effective(0.7, nb));
  CHECK((hc - ref).matrix().norm() <= 1e-12);
}

TEST_CASE("finite-eta gap converges as eta^-2") {
  const double lambda = 0.9;
  const double gap0 = std::sqrt(1.0 - lambda * lambda);
  std::vector<double> etas{10, 30, 100, 300}, diffs;
  for (const double eta : etas) {
    const FockOperator h = hamiltonian_corrected_mechanical(lambda, eta, 160);
    const Eigen::VectorXd e = interior_eigenvalues(h, 2);
    diffs.push_back(std::abs((e[1] - e[0]) - gap0));
  }
  CHECK(oracle::loglog_slope(etas, diffs) == Approx(-2.0).epsilon(0.05));
  CHECK(lambda_eff(0.9, kInfinity) == 0.9);
  CHECK(lambda_eff(0.9, 10.0) == Approx(std::sqrt(0.81 + 0.6561 / 600.0)));
}

TEST_CASE("Schrieffer-Wolff generator") {
  const double lambda = 0.5, eta = 20.0;
  for (const int order : {1, 3}) {
    const FockOperator s = sw_generator(lambda, eta, 4, 10, order);
    CHECK((s.matrix() + s.matrix().adjoint()).norm() <= 1e-12);
  }
  const FockOperator h = hamiltonian_linearized(lambda, eta, 8, 30);
  const double r1 = sw_offdiagonal_residual(h, sw_generator(lambda, eta, 8, 30, 1), 3, 9);
  const double r3 = sw_offdiagonal_residual(h, sw_generator(lambda, eta, 8, 30, 3), 3, 9);
  CHECK(r3 < r1);
  CHECK_THROWS_AS(sw_generator(lambda, eta, 4, 10, 2), Error);

  const FockOperator h100 = hamiltonian_linearized(lambda, 100.0, 8, 30);
  const double r100 = sw_offdiagonal_residual(h100, sw_generator(lambda, 100.0, 8, 30, 1), 3, 9);
  CHECK(r1 / r100 == Approx(std::sqrt(5.0)).epsilon(0.05));
}
