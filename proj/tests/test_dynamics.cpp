#include <doctest.h>

#include <cmath>
#include <numbers>

#include "comsense/dynamics.hpp"
#include "comsense/model.hpp"
#include "oracle.hpp"

using namespace comsense;
using doctest::Approx;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

}  // namespace

TEST_CASE("propagator basics") {
  const FockOperator h = hamiltonian_effective(0.0, 12);
  CHECK((propagator(h, 0.0).matrix() - Matrix::Identity(12, 12)).norm() == 0.0);
  const Matrix u = propagator(h, 2.0 * std::numbers::pi).matrix();
  const cplx phase = u(0, 0);
  CHECK(std::abs(std::abs(phase) - 1.0) < 1e-12);
  CHECK((u - phase * Matrix::Identity(12, 12)).norm() < 1e-10);
  CHECK_THROWS_AS(Propagator(ladder(5).annihilate), Error);
}

TEST_CASE("free oscillator rotates the superposition") {
  const auto times = linspace(0.0, 10.0, 41);
  const EffectiveRun run = evolve_effective(0.0, Superposition{}, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double mean = run.trajectory.mean_x[k];
    CHECK(mean == Approx(std::sin(times[k]) / std::sqrt(2.0)).epsilon(1e-10));
    CHECK(run.trajectory.var_x[k] + mean * mean == Approx(1.0).epsilon(1e-10));
    CHECK(run.trajectory.var_x[k] == Approx(1.0 - 0.5 * std::sin(times[k]) * std::sin(times[k])).epsilon(1e-10));
  }
}

TEST_CASE("numeric trajectories match the Heisenberg oracle") {
  for (const double lambda : {0.5, 0.9, 0.98}) {
    const auto times = linspace(0.0, 2.0 * tau(lambda), 200);
    const EffectiveRun run = evolve_effective(lambda, Superposition{}, times);
    std::vector<double> mean, var, mean_lib, var_lib;
    for (const double s : times) {
      const auto o = oracle::heisenberg(lambda, s, oracle::superposition_moments());
      mean.push_back(o.mean);
      var.push_back(o.var);
      const auto m = analytic_mean_var_superposition(lambda, s);
      mean_lib.push_back(m.mean_x);
      var_lib.push_back(m.var_x);
    }
    CHECK(max_abs_diff(run.trajectory.mean_x, mean) <= 1e-6);
    CHECK(max_abs_diff(run.trajectory.var_x, var) <= 1e-6);
    CHECK(max_abs_diff(mean_lib, mean) <= 1e-12);
    CHECK(max_abs_diff(var_lib, var) <= 1e-12);
  }
  for (const cplx alpha : {cplx(1, 0), cplx(0, 2), cplx(1, 1)}) {
    const double lambda = 0.9;
    const auto times = linspace(0.0, 2.0 * tau(lambda), 200);
    const EffectiveRun run = evolve_effective(lambda, Coherent{alpha}, times);
    std::vector<double> mean, var, mean_lib, var_lib;
    for (const double s : times) {
      const auto o = oracle::heisenberg(lambda, s, oracle::coherent_moments(alpha));
      mean.push_back(o.mean);
      var.push_back(o.var);
      const auto m = analytic_mean_var_coherent(lambda, alpha, s);
      mean_lib.push_back(m.mean_x);
      var_lib.push_back(m.var_x);
    }
    CHECK(max_abs_diff(run.trajectory.mean_x, mean) <= 1e-6);
    CHECK(max_abs_diff(run.trajectory.var_x, var) <= 1e-6);
    CHECK(max_abs_diff(mean_lib, mean) <= 1e-12);
    CHECK(max_abs_diff(var_lib, var) <= 1e-12);
  }
}

TEST_CASE("norm and energy are conserved") {
  const double lambda = 0.9;
  const auto times = linspace(0.0, 2.0 * tau(lambda), 30);
  const EffectiveRun run = evolve_effective(lambda, Coherent{{0.5, 1.0}}, times, 0, true);
  const FockOperator h = hamiltonian_effective(lambda, run.cutoff);
  const double e0 = expectation(h, run.trajectory.states.front()).real();
  for (const auto& psi : run.trajectory.states) {
    CHECK(std::abs(psi.amplitudes().norm() - 1.0) <= 1e-10);
    CHECK(std::abs(expectation(h, psi).real() - e0) <= 1e-10 * std::abs(e0));
  }
}

TEST_CASE("analytic moments at special times") {
  const auto m0 = analytic_mean_var_superposition(0.9, 0.0);
  CHECK(m0.mean_x == 0.0);
  CHECK(m0.var_x == Approx(1.0));
  const auto c0 = analytic_mean_var_coherent(0.9, {0, 2}, 0.0);
  CHECK(c0.mean_x == Approx(0.0));
  CHECK(c0.var_x == Approx(0.5));
  const auto c1 = analytic_mean_var_coherent(0.9, {0, 2}, tau(0.9));
  CHECK(c1.var_x == Approx(0.5).epsilon(1e-12));

  for (const double lambda : {0.5, 0.9}) {
    const double L = oracle::Lambda(lambda);
    for (const int n : {1, 2}) {
      const double chi = analytic_mean_var_superposition(lambda, tau(lambda, n)).susceptibility;
      const double sign = n % 2 == 1 ? 1.0 : -1.0;
      CHECK(chi == Approx(sign * 4.0 * std::sqrt(2.0) * n * std::numbers::pi * lambda * std::pow(L, -1.5))
                       .epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(analytic_mean_var_superposition(1.0, 1.0), Error);
  CHECK_THROWS_AS(analytic_mean_var_coherent(1.3, 1.0, 1.0), Error);
}

TEST_CASE("susceptibility matches a finite difference of the numeric mean") {
  const double lambda = 0.9, s = tau(lambda), d = 1e-4;
  const double times[] = {s};
  const double up = evolve_effective(lambda + d, Superposition{}, times).trajectory.mean_x[0];
  const double dn = evolve_effective(lambda - d, Superposition{}, times).trajectory.mean_x[0];
  const double fd = (up - dn) / (2.0 * d);
  CHECK(fd == Approx(analytic_mean_var_superposition(lambda, s).susceptibility).epsilon(1e-4));

  const cplx alpha(0.7, 1.3);
  const double cu = evolve_effective(lambda + d, Coherent{alpha}, times).trajectory.mean_x[0];
  const double cd = evolve_effective(lambda - d, Coherent{alpha}, times).trajectory.mean_x[0];
  CHECK((cu - cd) / (2.0 * d) ==
        Approx(analytic_mean_var_coherent(lambda, alpha, s).susceptibility).epsilon(1e-4));
}

TEST_CASE("peak times") {
  CHECK(std::abs(tau(0.9) - 7.2072) < 1.5e-4);
  CHECK(tau(0.9) == Approx(oracle::tau(0.9)).epsilon(1e-15));
  CHECK(tau(0.0) == Approx(std::numbers::pi));
  const auto peaks = peak_times(0.9, 3);
  REQUIRE(peaks.size() == 3);
  CHECK(peaks[2] == Approx(3.0 * tau(0.9)));
  CHECK_THROWS_AS(tau(1.0), Error);
}

TEST_CASE("fixed cutoff that is too small reports the offending time") {
  const auto times = linspace(0.0, tau(0.98), 20);
  try {
    evolve_effective(0.98, Coherent{{0, 2}}, times, 24);
    FAIL("expected cutoff error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CutoffTooSmall);
    CHECK(std::string(e.what()).find("at s =") != std::string::npos);
  }
}

TEST_CASE("non-increasing sample times are rejected") {
  const double times[] = {0.0, 2.0, 1.0};
  CHECK_THROWS_AS(evolve_effective(0.5, Superposition{}, times), Error);
}

TEST_CASE("corrected trajectories") {
  const auto times = linspace(0.0, tau(0.9), 25);
  const Trajectory inf = corrected_trajectory(0.9, kInfinity, Superposition{}, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto m = analytic_mean_var_superposition(0.9, times[k]);
    CHECK(inf.mean_x[k] == m.mean_x);
    CHECK(inf.var_x[k] == m.var_x);
  }
  CHECK_THROWS_AS(corrected_trajectory(0.9, 5.0, Superposition{}, times), Error);

  std::vector<double> etas{30, 100, 300}, dmean, dvar;
  const double s[] = {tau(0.9), 0.37 * tau(0.9)};
  const auto base = analytic_mean_var_superposition(0.9, s[0]);
  const auto base_var = analytic_mean_var_superposition(0.9, s[1]);
  for (const double eta : etas) {
    const Trajectory t = corrected_trajectory(0.9, eta, Superposition{}, s);
    dmean.push_back(std::abs(t.mean_x[0] - base.mean_x));
    dvar.push_back(std::abs(t.var_x[1] - base_var.var_x));
  }
  CHECK(oracle::loglog_slope(etas, dmean) == Approx(-2.0).epsilon(0.1));
  CHECK(oracle::loglog_slope(etas, dvar) == Approx(-2.0).epsilon(0.1));

  CorrectedOptions two_mode;
  two_mode.path = CorrectionPath::two_mode_numeric;
  two_mode.cavity_cutoff = 4;
  const auto short_times = linspace(0.0, 3.0, 7);
  const Trajectory tm = corrected_trajectory(0.5, 200.0, Superposition{}, short_times, two_mode);
  for (std::size_t k = 0; k < short_times.size(); ++k) {
    const auto m = analytic_mean_var_superposition(0.5, short_times[k]);
    CHECK(tm.mean_x[k] == Approx(m.mean_x).epsilon(1e-2));
  }
}

TEST_CASE("linspace") {
  const auto v = linspace(0.0, 1.0, 5);
  CHECK(v[1] == 0.25);
  CHECK(v.back() == 1.0);
  CHECK(linspace(2.0, 3.0, 1) == std::vector<double>{2.0});
  CHECK_THROWS_AS(linspace(0.0, 1.0, 0), Error);
}
