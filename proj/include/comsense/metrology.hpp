#pragma once

// Precision metrics for estimating lambda from the mechanical quadrature:
// generator-based QFI, homodyne CFI and error propagation, with the closed
// forms they are compared against.

#include <span>
#include <vector>

#include "comsense/dynamics.hpp"
#include "comsense/fock.hpp"

namespace comsense {

/// Operators of the generator algebra in omega_m = 1 units.
struct GeneratorDecomposition {
  FockOperator H0;     ///< P^2/2
  FockOperator H1;     ///< X^2/2
  FockOperator C;      ///< -i[H0, H1] = -(XP + PX)/2
  FockOperator D;      ///< P^2 - xi X^2
  FockOperator Gamma;  ///< i sqrt(Lambda) C - D
  double Lambda = 0.0;
  double xi = 0.0;

  int cutoff() const noexcept { return H0.shape().cutoff(); }
  /// H_xi = H0 + xi H1.
  FockOperator h_xi() const;
};

GeneratorDecomposition generator_decomposition(double lambda, int cutoff);

/// k-fold nested commutator [H_xi, [H_xi, ... [H_xi, H1]]].
FockOperator nested_commutator(const GeneratorDecomposition& gd, int k);

/// h_xi(s) = H1 s + (cos sqrt(Lambda)s - 1)/Lambda C - (sin sqrt(Lambda)s - sqrt(Lambda)s)/Lambda^{3/2} D.
FockOperator h_generator(const GeneratorDecomposition& gd, double s);

struct QfiTerms {
  double direct = 0.0;    ///< 4 lambda^2 4 Var[h_xi]
  double expanded = 0.0;  ///< 4 lambda^2 times the variance/covariance expansion
};

/// Both evaluations of the exact QFI on the initial state.
QfiTerms qfi_terms(const GeneratorDecomposition& gd, double lambda, double s,
                   const QuantumState& state);

/// Exact QFI I_lambda(s); throws InternalConsistency if the two evaluations
/// differ by more than 1e-6 relative.
double qfi_exact(double lambda, double s, const QuantumState& state);
double qfi_exact(const GeneratorDecomposition& gd, double lambda, double s,
                 const QuantumState& state);

/// 16 lambda^2 [sin(sqrt(Lambda)s) - sqrt(Lambda)s]^2 / Lambda^3 Var.
double qfi_asymptotic(double lambda, double s, double var_p2);
/// Same prefactor with the full Var[D] of `state`.
double qfi_asymptotic_var_d(const GeneratorDecomposition& gd, double lambda, double s,
                            const QuantumState& state);

/// 4[<dpsi|dpsi> - |<psi|dpsi>|^2] with dpsi from central differences of the
/// evolved state in lambda.
double qfi_numeric(double lambda, double s, const QuantumState& state, double dlambda = 1e-5);

/// Homodyne grid; zero fields pick half_width = 8 sqrt(Var X) and
/// step = half_width / 2000, centred on <X>.
struct HomodyneGrid {
  double half_width = 0.0;
  double step = 0.0;
  double centre = 0.0;
  bool centred = false;  ///< use `centre` instead of <X>
};

/// Probability density of X on a uniform grid.
std::vector<double> homodyne_density(const QuantumState& state, std::span<const double> xs);

/// Fisher information of the X distribution from three evolved states.
double cfi_from_states(const QuantumState& minus, const QuantumState& mid,
                       const QuantumState& plus, double dlambda, const HomodyneGrid& grid);

double cfi_homodyne(double lambda, double s, const QuantumState& state,
                    const HomodyneGrid& grid = {}, double dlambda = 1e-5);

enum class EvaluationPath { analytic, numeric };

/// (d<X>/d lambda)^2 / Var X.
double error_propagation(double lambda, double s, const StateKind& kind, EvaluationPath path,
                         int cutoff = 0);

struct MetrologySeries {
  double lambda = 0.0;
  StateKind kind;
  int cutoff = 0;
  std::vector<double> times;
  std::vector<double> mean_x;
  std::vector<double> var_x;
  std::vector<double> qfi_exact;
  std::vector<double> qfi_asymptotic;
  std::vector<double> cfi;
  std::vector<double> err_prop;
};

struct SeriesOptions {
  int cutoff = 0;  ///< 0 grows the cutoff until the tail check passes
  double dlambda = 1e-5;
  bool with_cfi = true;
};

/// All metrics on a shared time grid. Throws InternalConsistency when the
/// ordering qfi >= cfi >= err_prop fails beyond 1e-6 qfi at any sample.
MetrologySeries metrology_series(double lambda, std::span<const double> times,
                                 const StateKind& kind, const SeriesOptions& options = {});

/// Error-propagation figure with finite-eta dynamics over the eta = inf one,
/// both at s = 2 pi / sqrt(Lambda(lambda0)).
double finite_eta_ratio(double lambda0, double eta, const StateKind& kind,
                        CorrectionPath path = CorrectionPath::analytic_lambda_eff);

enum class WorkingPointForm { verbatim, variant };

/// log10[4(1 - lambda)^2 + lambda^4 eta^-2]/3, or with 4(1 - lambda^2) for the variant.
double working_point_relation(double lambda, double eta,
                              WorkingPointForm form = WorkingPointForm::verbatim);

struct Peak {
  double s = 0.0;
  double value = 0.0;
  std::size_t index = 0;
};

/// Discrete maximum refined by a parabola through its neighbours.
Peak refine_peak(std::span<const double> times, std::span<const double> values);

}  // namespace comsense
