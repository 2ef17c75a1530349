#pragma once

// Driven optomechanical system: laboratory parameters, the mean-field steady
// state, the derived critical-theory parameters, and the Hamiltonian family
// used downstream.
//
// Unit convention: every Hamiltonian builder works in omega_m = 1 units with
// dimensionless time s = omega_m t. In those units Lambda = 4 omega_m^2 xi and
// Lambda = 4 (1 - lambda^2) are the same number.

#include <limits>
#include <string>

#include "comsense/fock.hpp"

namespace comsense {

/// Frequencies and rates in rad/s.
struct PhysicalParams {
  double omega_c = 0.0;
  double omega_m = 1.0;
  double omega_l = 0.0;
  double g = 0.0;
  double eps_l = 0.0;
  double gamma_c = 0.0;
  double gamma_m = 0.0;

  double delta() const noexcept { return omega_c - omega_l; }
  void validate() const;
};

struct SteadyState {
  cplx mean_a;
  cplx mean_b;
  double residual = 0.0;
  int iterations = 0;
  /// Set when the damped iteration stalled in an oscillation on the way.
  bool multistability_warning = false;
};

struct SteadyStateOptions {
  double tol = 1e-12;
  int max_iter = 100000;
  double damping = 0.5;
  int continuation_steps = 16;
};

/// Thrown when the fixed point is not reached; carries the last iterate.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, SteadyState last)
      : Error(ErrorCode::Divergence, what), last_(last) {}
  const SteadyState& last_iterate() const noexcept { return last_; }

 private:
  SteadyState last_;
};

/// Max of the absolute residuals of the two mean-amplitude fixed-point
/// equations at (mean_a, mean_b).
double steady_state_residual(const PhysicalParams& p, cplx mean_a, cplx mean_b);

/// Damped fixed-point iteration, continued from eps_l = 0 so the returned
/// branch is the one connected to the undriven solution.
SteadyState steady_state(const PhysicalParams& p, const SteadyStateOptions& options = {});

enum class Phase { stable, critical, unstable };

std::string_view phase_name(Phase phase) noexcept;

Phase classify_phase(double lambda);

struct EffectiveParams {
  double omega_m = 1.0;
  double Delta = 0.0;    ///< rad/s
  double G = 0.0;        ///< rad/s, real and non-negative
  double lambda = 0.0;   ///< 2G / sqrt(Delta omega_m)
  double eta = 0.0;      ///< Delta / omega_m
  double xi = 0.0;       ///< 1 - lambda^2
  double Lambda = 0.0;   ///< 4 xi
  cplx eps_np;           ///< omega_m sqrt(1 - lambda^2); imaginary past the critical point
  double E_np = 0.0;     ///< (eps_np - omega_m)/2, NaN unless stable
  double r_np = 0.0;     ///< ln(1 - lambda^2)/4, NaN unless stable
  Phase phase = Phase::stable;

  bool eps_np_real() const noexcept { return eps_np.imag() == 0.0; }
  /// Squeeze parameter r with S^+(r) H S(r) diagonal for S(r) = exp[r(b^+2 - b^2)/2];
  /// equals -r_np.
  double diagonalizing_squeeze() const noexcept { return -r_np; }
};

/// Critical-theory parameters from lambda and eta directly (omega_m = 1).
EffectiveParams effective_params(double lambda, double eta);
/// Rotates the drive phase so G = g|<a>| and Delta = delta - 2 g Re<b>.
EffectiveParams effective_params(const PhysicalParams& p, const SteadyState& ss);

/// Delta a^+a + omega_m b^+b - G (a^+ + a)(b^+ + b) in omega_m = 1 units.
FockOperator hamiltonian_linearized(const EffectiveParams& ep, int cutoff_a, int cutoff_b);
FockOperator hamiltonian_linearized(double lambda, double eta, int cutoff_a, int cutoff_b);

/// b^+b - (lambda^2/4)(b^+ + b)^2, plus 1/2 when include_zero_point is set
/// (which makes it equal to the quadrature form).
FockOperator hamiltonian_effective(double lambda, int cutoff, bool include_zero_point = false);
/// [P^2 + (1 - lambda^2) X^2]/2.
FockOperator hamiltonian_effective_quadrature(double lambda, int cutoff);

/// lambda_eff^2 = lambda^2 + lambda^4 eta^-2 / 6 from completing the square in
/// the mechanical terms of the corrected Hamiltonian. eta = inf gives lambda.
double lambda_eff(double lambda, double eta);

/// Two-mode finite-eta Hamiltonian. With finite_eta_terms = false the two
/// eta-suppressed terms are dropped.
FockOperator hamiltonian_corrected(double lambda, double eta, int cutoff_a, int cutoff_b,
                                   bool finite_eta_terms = true);
/// Mechanical-only reduction for a cavity left in vacuum.
FockOperator hamiltonian_corrected_mechanical(double lambda, double eta, int cutoff);

/// Anti-Hermitian Schrieffer-Wolff generator. order = 1 keeps only the leading
/// (lambda/2) eta^-1/2 (b + b^+)(a^+ - a) term; order = 3 adds the
/// eta^-3/2 corrections.
FockOperator sw_generator(double lambda, double eta, int cutoff_a, int cutoff_b, int order);

/// Frobenius norm of the part of e^{-S} H e^{S} that changes the cavity
/// number by an odd amount, restricted to n_a < keep_cavity, n_b < keep_mechanical.
double sw_offdiagonal_residual(const FockOperator& h, const FockOperator& s, int keep_cavity,
                               int keep_mechanical);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace comsense
