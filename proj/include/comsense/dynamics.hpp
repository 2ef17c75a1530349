#pragma once

// Unitary propagation on truncated spaces and the closed-form quadrature
// trajectories of the effective model. Time is always s = omega_m t.

#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "comsense/fock.hpp"
#include "comsense/spectral.hpp"

namespace comsense {

/// exp(-i H s) for many s from one eigendecomposition of H.
class Propagator {
 public:
  explicit Propagator(const FockOperator& h);

  const FockShape& shape() const noexcept { return shape_; }
  const HermitianSpectrum& spectrum() const noexcept { return spectrum_; }

  FockOperator matrix(double s) const;
  QuantumState apply(const QuantumState& state, double s) const;

 private:
  FockShape shape_;
  HermitianSpectrum spectrum_;
};

/// U = exp(-i H duration); H must carry the Hermitian flag.
FockOperator propagator(const FockOperator& h, double duration);

enum class TrajectorySource { numeric, analytic_superposition, analytic_coherent, analytic_corrected };

std::string_view source_name(TrajectorySource source) noexcept;

struct Trajectory {
  std::vector<double> times;
  std::vector<QuantumState> states;  ///< empty unless requested
  std::vector<double> mean_x;
  std::vector<double> var_x;
  TrajectorySource source = TrajectorySource::numeric;
};

/// Mechanical X = (b + b^+)/sqrt2 on the shape of `shape`.
FockOperator mechanical_x(const FockShape& shape);

/// Evolves under H and records <X>, Var X of the mechanical mode. Every sample
/// is checked for tail_mass <= 1e-8; a breach throws CutoffTooSmall naming the
/// first offending time.
Trajectory evolve_trajectory(const QuantumState& state0, const FockOperator& h,
                             std::span<const double> times, bool keep_states = false);
Trajectory evolve_trajectory(const QuantumState& state0, const Propagator& u,
                             std::span<const double> times, bool keep_states = false);

struct QuadratureMoments {
  double mean_x = 0.0;
  double var_x = 0.0;
  double x2 = 0.0;
  double susceptibility = 0.0;  ///< d<X>/d lambda
};

/// Heisenberg solution of the effective model for (|0> + i|1>)/sqrt2.
QuadratureMoments analytic_mean_var_superposition(double lambda, double s);
/// Heisenberg solution of the effective model for a coherent state |alpha>.
QuadratureMoments analytic_mean_var_coherent(double lambda, cplx alpha, double s);

/// tau_n = 2 n pi / sqrt(Lambda).
double tau(double lambda, int n = 1);
std::vector<double> peak_times(double lambda, int n_max);

struct Superposition {};
struct Coherent {
  cplx alpha;
};
using StateKind = std::variant<Superposition, Coherent>;

std::string_view state_kind_name(const StateKind& kind) noexcept;
QuantumState make_state(const StateKind& kind, int cutoff);
QuadratureMoments analytic_moments(const StateKind& kind, double lambda, double s);

/// Smallest cutoff worth trying for the effective model at lambda.
int initial_cutoff(double lambda, const StateKind& kind);

/// Effective single-mode evolution with a cutoff grown by 1.25x from
/// initial_cutoff until every sample passes the tail check. cutoff > 0 fixes it.
struct EffectiveRun {
  Trajectory trajectory;
  int cutoff = 0;
};
EffectiveRun evolve_effective(double lambda, const StateKind& kind, std::span<const double> times,
                              int cutoff = 0, bool keep_states = false);

enum class CorrectionPath { analytic_lambda_eff, two_mode_numeric };

struct CorrectedOptions {
  CorrectionPath path = CorrectionPath::analytic_lambda_eff;
  int cavity_cutoff = 12;
  int mechanical_cutoff = 0;  ///< 0 picks the single-mode rule
  /// Evolve under e^{-S} H_L e^{S} (third-order S) so the cavity starts in the
  /// dressed vacuum.
  bool frame_matched = false;
};

/// Finite-eta trajectory. eta = inf on the analytic path reproduces the
/// uncorrected closed forms.
Trajectory corrected_trajectory(double lambda, double eta, const StateKind& kind,
                                std::span<const double> times, const CorrectedOptions& options = {});

/// Evenly spaced samples over [start, stop] inclusive.
std::vector<double> linspace(double start, double stop, int count);

}  // namespace comsense
