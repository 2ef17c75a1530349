#include "comsense/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "comsense/model.hpp"

namespace comsense {
namespace {

constexpr double kTailTol = 1e-8;
constexpr int kMaxCutoff = 4000;

void require_stable(double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
  if (!(lambda < 1.0)) {
    throw Error(ErrorCode::UnstableRegime,
                "unstable regime: lambda = " + std::to_string(lambda) + " is not below 1");
  }
}

double sqrt_lambda(double lambda) {
  require_stable(lambda);
  return 2.0 * std::sqrt(1.0 - lambda * lambda);
}

}  // namespace

Propagator::Propagator(const FockOperator& h) : shape_(h.shape()), spectrum_([&] {
  if (!h.hermitian()) throw Error(ErrorCode::NotHermitian, "propagator needs a Hermitian H");
  return HermitianSpectrum(h.matrix());
}()) {}

FockOperator Propagator::matrix(double s) const { return FockOperator(shape_, spectrum_.exp_i(s)); }

QuantumState Propagator::apply(const QuantumState& state, double s) const {
  if (!(state.shape() == shape_)) {
    throw Error(ErrorCode::DimensionMismatch, "state does not match propagator shape");
  }
  return QuantumState(shape_, spectrum_.apply_exp_i(state.amplitudes(), s));
}

FockOperator propagator(const FockOperator& h, double duration) {
  return Propagator(h).matrix(duration);
}

std::string_view source_name(TrajectorySource source) noexcept {
  switch (source) {
    case TrajectorySource::numeric: return "numeric";
    case TrajectorySource::analytic_superposition: return "analytic-superposition";
    case TrajectorySource::analytic_coherent: return "analytic-coherent";
    case TrajectorySource::analytic_corrected: return "analytic-corrected";
  }
  return "unknown";
}

FockOperator mechanical_x(const FockShape& shape) {
  const FockOperator x = quadratures(shape.mechanical_cutoff()).x;
  if (shape.modes() == 1) return x;
  return as_hermitian(
      embed(x, Mode::mechanical, {shape.cavity_cutoff(), shape.mechanical_cutoff()}));
}

Trajectory evolve_trajectory(const QuantumState& state0, const FockOperator& h,
                             std::span<const double> times, bool keep_states) {
  return evolve_trajectory(state0, Propagator(h), times, keep_states);
}

Trajectory evolve_trajectory(const QuantumState& state0, const Propagator& u,
                             std::span<const double> times, bool keep_states) {
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "sample times must be strictly increasing");
    }
  }
  const FockOperator x = mechanical_x(state0.shape());
  Trajectory traj;
  traj.source = TrajectorySource::numeric;
  traj.times.assign(times.begin(), times.end());
  traj.mean_x.reserve(times.size());
  traj.var_x.reserve(times.size());
  for (const double s : times) {
    QuantumState psi = u.apply(state0, s);
    if (psi.tail_mass() > kTailTol) {
      std::ostringstream msg;
      msg << "cutoff too small: tail mass " << psi.tail_mass() << " at s = " << s;
      throw Error(ErrorCode::CutoffTooSmall, msg.str());
    }
    traj.mean_x.push_back(expectation(x, psi).real());
    traj.var_x.push_back(variance(x, psi));
    if (keep_states) traj.states.push_back(std::move(psi));
  }
  return traj;
}

QuadratureMoments analytic_mean_var_superposition(double lambda, double s) {
  const double root = sqrt_lambda(lambda);
  const double big = root * root;
  const double l2 = lambda * lambda;
  const double half = 0.5 * root * s;
  QuadratureMoments m;
  m.mean_x = std::numbers::sqrt2 / root * std::sin(half);
  m.var_x = 1.0 + (2.0 * l2 - 1.0) / big * (1.0 - std::cos(root * s));
  m.x2 = 1.0 + 2.0 * l2 / big * (1.0 - std::cos(root * s));
  m.susceptibility = 4.0 * std::numbers::sqrt2 * lambda / (big * root) * std::sin(half) -
                     2.0 * std::numbers::sqrt2 * lambda * s / big * std::cos(half);
  return m;
}

QuadratureMoments analytic_mean_var_coherent(double lambda, cplx alpha, double s) {
  const double w = 0.5 * sqrt_lambda(lambda);
  const double c = std::cos(w * s);
  const double sn = std::sin(w * s);
  const double re = std::numbers::sqrt2 * alpha.real();
  const double im = std::numbers::sqrt2 * alpha.imag();
  const double dw = -lambda / w;
  QuadratureMoments m;
  m.mean_x = re * c + im * sn / w;
  m.var_x = 0.5 * c * c + 0.5 * sn * sn / (w * w);
  m.x2 = m.var_x + m.mean_x * m.mean_x;
  m.susceptibility = dw * (-re * s * sn + im * (s * c / w - sn / (w * w)));
  return m;
}

double tau(double lambda, int n) { return 2.0 * n * std::numbers::pi / sqrt_lambda(lambda); }

std::vector<double> peak_times(double lambda, int n_max) {
  const double t1 = tau(lambda, 1);
  std::vector<double> out;
  for (int n = 1; n <= n_max; ++n) out.push_back(n * t1);
  return out;
}

std::string_view state_kind_name(const StateKind& kind) noexcept {
  return std::holds_alternative<Superposition>(kind) ? "superposition" : "coherent";
}

QuantumState make_state(const StateKind& kind, int cutoff) {
  if (const auto* c = std::get_if<Coherent>(&kind)) return coherent_state(c->alpha, cutoff);
  return superposition_state(cutoff);
}

QuadratureMoments analytic_moments(const StateKind& kind, double lambda, double s) {
  if (const auto* c = std::get_if<Coherent>(&kind)) {
    return analytic_mean_var_coherent(lambda, c->alpha, s);
  }
  return analytic_mean_var_superposition(lambda, s);
}

int initial_cutoff(double lambda, const StateKind& kind) {
  require_stable(lambda);
  const double xi = 1.0 - lambda * lambda;
  double occupation = 1.0 + lambda * lambda / xi;
  int floor_cutoff = 2;
  if (const auto* c = std::get_if<Coherent>(&kind)) {
    const double a2 = std::norm(c->alpha);
    occupation = a2 * (1.0 + 1.0 / xi) + 1.0 / xi;
    floor_cutoff = static_cast<int>(std::ceil(4.0 * a2));
  }
  const int rule = static_cast<int>(std::ceil(40.0 / std::sqrt(xi)));
  const int spread = static_cast<int>(std::ceil(6.0 * occupation + 40.0));
  return std::min(kMaxCutoff, std::max({rule, spread, floor_cutoff}));
}

EffectiveRun evolve_effective(double lambda, const StateKind& kind, std::span<const double> times,
                              int cutoff, bool keep_states) {
  require_stable(lambda);
  const bool fixed = cutoff > 0;
  int n = fixed ? cutoff : initial_cutoff(lambda, kind);
  for (;;) {
    try {
      const QuantumState psi0 = make_state(kind, n);
      return {evolve_trajectory(psi0, hamiltonian_effective(lambda, n), times, keep_states), n};
    } catch (const Error& e) {
      if (fixed || e.code() != ErrorCode::CutoffTooSmall || n >= kMaxCutoff) throw;
      n = std::min(kMaxCutoff, static_cast<int>(std::ceil(1.25 * n)));
    }
  }
}

Trajectory corrected_trajectory(double lambda, double eta, const StateKind& kind,
                                std::span<const double> times, const CorrectedOptions& options) {
  require_stable(lambda);
  if (options.path == CorrectionPath::analytic_lambda_eff) {
    if (!(eta >= 10.0)) {
      throw Error(ErrorCode::InvalidRegime, "analytic finite-eta path needs eta >= 10");
    }
    const double le = lambda_eff(lambda, eta);
    require_stable(le);
    Trajectory traj;
    traj.source = TrajectorySource::analytic_corrected;
    traj.times.assign(times.begin(), times.end());
    for (const double s : times) {
      const QuadratureMoments m = analytic_moments(kind, le, s);
      traj.mean_x.push_back(m.mean_x);
      traj.var_x.push_back(m.var_x);
    }
    return traj;
  }

  if (!std::isfinite(eta)) {
    throw Error(ErrorCode::InvalidArgument, "two-mode path needs finite eta");
  }
  const int na = options.cavity_cutoff;
  const int nb = options.mechanical_cutoff > 0 ? options.mechanical_cutoff
                                               : initial_cutoff(lambda, kind);
  FockOperator h = hamiltonian_linearized(lambda, eta, na, nb);
  if (options.frame_matched) {
    const Matrix u = exp_antihermitian(sw_generator(lambda, eta, na, nb, 3).matrix());
    const Matrix dressed = u.adjoint() * h.matrix() * u;
    h = FockOperator(h.shape(), 0.5 * (dressed + dressed.adjoint()), true);
  }
  const QuantumState psi0 = product_state(basis_state(0, na), make_state(kind, nb));
  return evolve_trajectory(psi0, h, times);
}

std::vector<double> linspace(double start, double stop, int count) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "linspace needs at least one point");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = start;
    return out;
  }
  const double step = (stop - start) / (count - 1);
  for (int k = 0; k < count; ++k) out[k] = start + k * step;
  out.back() = stop;
  return out;
}

}  // namespace comsense
