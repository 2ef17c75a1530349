#include "comsense/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "comsense/spectral.hpp"

namespace comsense {
namespace {

struct MeanMap {
  cplx a;
  cplx b;
};

// Right-hand sides of the two fixed-point equations at drive `eps`.
MeanMap mean_map(const PhysicalParams& p, double eps, cplx a, cplx b) {
  const cplx den_a = cplx(p.gamma_c / 2.0, 0.0) - kI * (2.0 * p.g * b - p.delta());
  const cplx den_b = kI * p.omega_m + p.gamma_m / 2.0;
  if (std::abs(den_a) == 0.0) {
    throw Error(ErrorCode::InvalidRegime, "cavity response is singular (gamma_c = 0 on resonance)");
  }
  return {eps / den_a, kI * p.g * std::norm(a) / den_b};
}

double map_residual(const PhysicalParams& p, double eps, cplx a, cplx b) {
  const MeanMap f = mean_map(p, eps, a, b);
  return std::max(std::abs(a - f.a), std::abs(b - f.b));
}

void check_eta(double eta) {
  if (!(eta >= 1.0)) {
    throw Error(ErrorCode::InvalidRegime, "finite-eta corrections need eta >= 1");
  }
}

struct TwoModeLadders {
  FockOperator a, ad, b, bd;
};

TwoModeLadders two_mode_ladders(int cutoff_a, int cutoff_b) {
  const auto la = ladder(cutoff_a);
  const auto lb = ladder(cutoff_b);
  const std::pair<int, int> cuts{cutoff_a, cutoff_b};
  return {embed(la.annihilate, Mode::cavity, cuts), embed(la.create, Mode::cavity, cuts),
          embed(lb.annihilate, Mode::mechanical, cuts), embed(lb.create, Mode::mechanical, cuts)};
}

}  // namespace

void PhysicalParams::validate() const {
  if (!(omega_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega_m must be positive");
  if (gamma_c < 0.0 || gamma_m < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "decay rates must be non-negative");
  }
  if (eps_l < 0.0) throw Error(ErrorCode::InvalidArgument, "drive amplitude must be non-negative");
}

double steady_state_residual(const PhysicalParams& p, cplx mean_a, cplx mean_b) {
  return map_residual(p, p.eps_l, mean_a, mean_b);
}

SteadyState steady_state(const PhysicalParams& p, const SteadyStateOptions& options) {
  p.validate();
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "damping must lie in (0, 1]");
  }

  SteadyState ss{cplx{}, cplx{}, 0.0, 0, false};
  if (p.eps_l == 0.0) return ss;

  constexpr int kStallWindow = 2000;
  const int steps = std::max(1, options.continuation_steps);
  const double beta = options.damping;
  for (int step = 1; step <= steps; ++step) {
    const double eps = p.eps_l * step / steps;
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (;;) {
      const double res = map_residual(p, eps, ss.mean_a, ss.mean_b);
      ss.residual = res;
      if (res <= options.tol) break;
      if (ss.iterations >= options.max_iter) {
        throw DivergenceError("steady state did not converge after " +
                                  std::to_string(ss.iterations) + " iterations (residual " +
                                  std::to_string(res) + ")",
                              ss);
      }
      if (res < best) {
        best = res;
        since_best = 0;
      } else if (++since_best >= kStallWindow) {
        ss.multistability_warning = true;
        since_best = 0;
      }
      const MeanMap f = mean_map(p, eps, ss.mean_a, ss.mean_b);
      ss.mean_a = (1.0 - beta) * ss.mean_a + beta * f.a;
      ss.mean_b = (1.0 - beta) * ss.mean_b + beta * f.b;
      ++ss.iterations;
    }
  }
  ss.residual = steady_state_residual(p, ss.mean_a, ss.mean_b);
  return ss;
}

std::string_view phase_name(Phase phase) noexcept {
  switch (phase) {
    case Phase::stable: return "stable";
    case Phase::critical: return "critical";
    case Phase::unstable: return "unstable";
  }
  return "unknown";
}

Phase classify_phase(double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
  if (std::abs(lambda - 1.0) <= 1e-12) return Phase::critical;
  return lambda < 1.0 ? Phase::stable : Phase::unstable;
}

EffectiveParams effective_params(double lambda, double eta) {
  if (!(eta > 0.0)) {
    throw Error(ErrorCode::InvalidRegime, "effective detuning must be positive (eta > 0)");
  }
  EffectiveParams ep;
  ep.omega_m = 1.0;
  ep.eta = eta;
  ep.Delta = eta;
  ep.lambda = lambda;
  ep.G = std::isinf(eta) ? kInfinity : 0.5 * lambda * std::sqrt(eta);
  ep.phase = classify_phase(lambda);
  ep.xi = 1.0 - lambda * lambda;
  ep.Lambda = 4.0 * ep.xi;
  ep.eps_np = std::sqrt(cplx(ep.xi, 0.0));
  if (ep.xi <= 0.0) ep.eps_np = cplx(0.0, std::sqrt(-ep.xi));
  if (ep.phase == Phase::stable) {
    ep.E_np = 0.5 * (ep.eps_np.real() - 1.0);
    ep.r_np = 0.25 * std::log(ep.xi);
  } else {
    ep.E_np = std::numeric_limits<double>::quiet_NaN();
    ep.r_np = std::numeric_limits<double>::quiet_NaN();
  }
  return ep;
}

EffectiveParams effective_params(const PhysicalParams& p, const SteadyState& ss) {
  p.validate();
  if (!(ss.residual <= 1e-8)) {
    throw Error(ErrorCode::InvalidArgument, "steady state residual above 1e-8");
  }
  const double Delta = p.delta() - 2.0 * p.g * ss.mean_b.real();
  if (!(Delta > 0.0)) {
    throw Error(ErrorCode::InvalidRegime,
                "effective detuning Delta = " + std::to_string(Delta) + " is not positive");
  }
  const double G = p.g * std::abs(ss.mean_a);
  const double lambda = 2.0 * G / std::sqrt(Delta * p.omega_m);
  EffectiveParams ep = effective_params(lambda, Delta / p.omega_m);
  ep.omega_m = p.omega_m;
  ep.Delta = Delta;
  ep.G = G;
  ep.eps_np *= p.omega_m;
  ep.E_np *= p.omega_m;
  return ep;
}

FockOperator hamiltonian_linearized(const EffectiveParams& ep, int cutoff_a, int cutoff_b) {
  if (!std::isfinite(ep.eta)) {
    throw Error(ErrorCode::InvalidArgument, "two-mode Hamiltonian needs finite eta");
  }
  const auto m = two_mode_ladders(cutoff_a, cutoff_b);
  const double coupling = ep.G / ep.omega_m;
  const FockOperator h =
      ep.eta * (m.ad * m.a) + m.bd * m.b - coupling * ((m.ad + m.a) * (m.bd + m.b));
  return as_hermitian(h);
}

FockOperator hamiltonian_linearized(double lambda, double eta, int cutoff_a, int cutoff_b) {
  return hamiltonian_linearized(effective_params(lambda, eta), cutoff_a, cutoff_b);
}

FockOperator hamiltonian_effective(double lambda, int cutoff, bool include_zero_point) {
  const auto [b, bd] = ladder(cutoff);
  const FockOperator x2 = (bd + b) * (bd + b);
  FockOperator h = bd * b - 0.25 * lambda * lambda * x2;
  if (include_zero_point) h += 0.5 * identity(cutoff);
  return as_hermitian(h);
}

FockOperator hamiltonian_effective_quadrature(double lambda, int cutoff) {
  const auto [x, p] = quadratures(cutoff);
  return as_hermitian(0.5 * (p * p) + 0.5 * (1.0 - lambda * lambda) * (x * x));
}

double lambda_eff(double lambda, double eta) {
  if (std::isinf(eta)) return lambda;
  const double l2 = lambda * lambda;
  return std::sqrt(l2 + l2 * l2 / (6.0 * eta * eta));
}

FockOperator hamiltonian_corrected(double lambda, double eta, int cutoff_a, int cutoff_b,
                                   bool finite_eta_terms) {
  check_eta(eta);
  if (!std::isfinite(eta)) {
    throw Error(ErrorCode::InvalidArgument, "two-mode Hamiltonian needs finite eta");
  }
  const auto m = two_mode_ladders(cutoff_a, cutoff_b);
  const FockOperator xa2 = (m.ad + m.a) * (m.ad + m.a);
  const FockOperator xb2 = (m.bd + m.b) * (m.bd + m.b);
  const double l2 = lambda * lambda;
  FockOperator h = eta * (m.ad * m.a) + m.bd * m.b - 0.25 * l2 * xb2;
  if (finite_eta_terms) {
    h -= (0.25 * l2 / eta) * xa2;
    h -= (l2 * l2 / (24.0 * eta * eta)) * xb2;
  }
  return as_hermitian(h);
}

FockOperator hamiltonian_corrected_mechanical(double lambda, double eta, int cutoff) {
  if (!std::isinf(eta)) check_eta(eta);
  return hamiltonian_effective(lambda_eff(lambda, eta), cutoff);
}

FockOperator sw_generator(double lambda, double eta, int cutoff_a, int cutoff_b, int order) {
  check_eta(eta);
  if (order != 1 && order != 3) {
    throw Error(ErrorCode::InvalidArgument, "SW generator order must be 1 or 3");
  }
  const auto m = two_mode_ladders(cutoff_a, cutoff_b);
  const FockOperator xb = m.b + m.bd;
  const FockOperator xa = m.a + m.ad;
  const FockOperator ka = m.ad - m.a;
  FockOperator s = (0.5 * lambda / std::sqrt(eta)) * (xb * ka);
  if (order == 3) {
    const double eta32 = eta * std::sqrt(eta);
    const FockOperator wb = m.b - m.bd;
    // The cubic bracket is Hermitian; pairing it with (a^+ - a) keeps S anti-Hermitian.
    const FockOperator bracket = xb * xb * xb - wb * wb - xb;
    s += (0.5 * lambda / eta32) * (wb * xa);
    s += (lambda * lambda * lambda / (12.0 * eta32)) * (bracket * ka);
  }
  return s;
}

double sw_offdiagonal_residual(const FockOperator& h, const FockOperator& s, int keep_cavity,
                               int keep_mechanical) {
  if (h.shape().modes() != 2 || !(h.shape() == s.shape())) {
    throw Error(ErrorCode::DimensionMismatch, "SW residual needs matching two-mode operators");
  }
  const Matrix u = exp_antihermitian(s.matrix());
  const FockOperator transformed(h.shape(), u.adjoint() * h.matrix() * u);

  const int nb = h.shape().mechanical_cutoff();
  Matrix odd = transformed.matrix();
  for (Eigen::Index i = 0; i < odd.rows(); ++i) {
    for (Eigen::Index j = 0; j < odd.cols(); ++j) {
      if (((i / nb) - (j / nb)) % 2 == 0) odd(i, j) = 0.0;
    }
  }
  return interior_block(FockOperator(h.shape(), std::move(odd)), keep_cavity, keep_mechanical)
      .norm();
}

}  // namespace comsense
