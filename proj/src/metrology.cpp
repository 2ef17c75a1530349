#include "comsense/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "comsense/model.hpp"

namespace comsense {
namespace {

constexpr double kGridWidth = 8.0;

void require_stable(double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
  if (!(lambda < 1.0)) {
    throw Error(ErrorCode::UnstableRegime,
                "unstable regime: lambda = " + std::to_string(lambda) + " is not below 1");
  }
}

void check_dlambda(double lambda, double dlambda) {
  if (!(dlambda >= 1e-6 && dlambda <= 1e-3)) {
    throw Error(ErrorCode::InvalidArgument, "dlambda must lie in [1e-6, 1e-3]");
  }
  require_stable(lambda + dlambda);
}

double trapezoid(std::span<const double> f, double step) {
  if (f.size() < 2) return 0.0;
  double sum = 0.5 * (f.front() + f.back());
  for (std::size_t k = 1; k + 1 < f.size(); ++k) sum += f[k];
  return sum * step;
}

double mean_x(const QuantumState& psi) {
  return expectation(mechanical_x(psi.shape()), psi).real();
}

double var_x(const QuantumState& psi) { return variance(mechanical_x(psi.shape()), psi); }

double susceptibility_ratio(double chi, double var) {
  if (!(var > 0.0)) throw Error(ErrorCode::InvalidArgument, "Var X vanished");
  return chi * chi / var;
}

void check_tail(const QuantumState& psi, double s) {
  if (psi.tail_mass() > 1e-8) {
    std::ostringstream msg;
    msg << "cutoff too small: tail mass " << psi.tail_mass() << " at s = " << s;
    throw Error(ErrorCode::CutoffTooSmall, msg.str());
  }
}

}  // namespace

FockOperator GeneratorDecomposition::h_xi() const { return as_hermitian(H0 + xi * H1); }

GeneratorDecomposition generator_decomposition(double lambda, int cutoff) {
  require_stable(lambda);
  const auto [x, p] = quadratures(cutoff);
  const double xi = 1.0 - lambda * lambda;
  const double big = 4.0 * xi;
  const FockOperator x2 = x * x;
  const FockOperator p2 = p * p;
  FockOperator c = as_hermitian(-0.5 * (x * p + p * x));
  FockOperator d = as_hermitian(p2 - xi * x2);
  FockOperator gamma = cplx(0.0, std::sqrt(big)) * c - d;
  return {as_hermitian(0.5 * p2), as_hermitian(0.5 * x2), std::move(c), std::move(d),
          std::move(gamma), big, xi};
}

FockOperator nested_commutator(const GeneratorDecomposition& gd, int k) {
  const FockOperator h = gd.h_xi();
  FockOperator out = gd.H1;
  for (int i = 0; i < k; ++i) out = commutator(h, out);
  return out;
}

FockOperator h_generator(const GeneratorDecomposition& gd, double s) {
  if (!(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "time must be non-negative");
  const double root = std::sqrt(gd.Lambda);
  const double a = (std::cos(root * s) - 1.0) / gd.Lambda;
  const double b = (std::sin(root * s) - root * s) / (gd.Lambda * root);
  return as_hermitian(s * gd.H1 + a * gd.C - b * gd.D);
}

QfiTerms qfi_terms(const GeneratorDecomposition& gd, double lambda, double s,
                   const QuantumState& state) {
  const double big = gd.Lambda;
  const double root = std::sqrt(big);
  const double h = 2.0 * (std::sin(root * s) - root * s);
  const double j = 2.0 * (std::cos(root * s) - 1.0);
  const double chain = 4.0 * lambda * lambda;

  QfiTerms t;
  t.direct = chain * 4.0 * variance(h_generator(gd, s), state);
  const double i_xi = 4.0 * s * s * variance(gd.H1, state) +
                      j * j / (big * big) * variance(gd.C, state) +
                      h * h / (big * big * big) * variance(gd.D, state) +
                      2.0 * j * s / big * symmetrized_covariance(gd.H1, gd.C, state) -
                      2.0 * h * s / (big * root) * symmetrized_covariance(gd.H1, gd.D, state) -
                      h * j / (big * big * root) * symmetrized_covariance(gd.C, gd.D, state);
  t.expanded = chain * i_xi;
  return t;
}

double qfi_exact(const GeneratorDecomposition& gd, double lambda, double s,
                 const QuantumState& state) {
  const QfiTerms t = qfi_terms(gd, lambda, s, state);
  const double scale = std::max(std::abs(t.direct), std::abs(t.expanded));
  if (std::abs(t.direct - t.expanded) > 1e-6 * scale + 1e-14) {
    std::ostringstream msg;
    msg << "QFI evaluations disagree: " << t.direct << " vs " << t.expanded;
    throw Error(ErrorCode::InternalConsistency, msg.str());
  }
  return t.direct;
}

double qfi_exact(double lambda, double s, const QuantumState& state) {
  state.require_adequate();
  return qfi_exact(generator_decomposition(lambda, state.shape().cutoff()), lambda, s, state);
}

double qfi_asymptotic(double lambda, double s, double var_p2) {
  require_stable(lambda);
  const double big = 4.0 * (1.0 - lambda * lambda);
  const double root = std::sqrt(big);
  const double bracket = std::sin(root * s) - root * s;
  return 16.0 * lambda * lambda * bracket * bracket / (big * big * big) * var_p2;
}

double qfi_asymptotic_var_d(const GeneratorDecomposition& gd, double lambda, double s,
                            const QuantumState& state) {
  return qfi_asymptotic(lambda, s, variance(gd.D, state));
}

double qfi_numeric(double lambda, double s, const QuantumState& state, double dlambda) {
  require_stable(lambda);
  check_dlambda(lambda, dlambda);
  state.require_adequate();
  const int n = state.shape().cutoff();
  const QuantumState mid = Propagator(hamiltonian_effective(lambda, n)).apply(state, s);
  const QuantumState plus = Propagator(hamiltonian_effective(lambda + dlambda, n)).apply(state, s);
  const QuantumState minus =
      Propagator(hamiltonian_effective(lambda - dlambda, n)).apply(state, s);
  check_tail(plus, s);
  const Vector d = (plus.amplitudes() - minus.amplitudes()) / (2.0 * dlambda);
  const double dd = d.squaredNorm();
  const double overlap = std::norm(mid.amplitudes().dot(d));
  const double q = dd - overlap;
  if (q < -1e-10 * dd) {
    throw Error(ErrorCode::StepTooSmall, "negative state variance: dlambda too small");
  }
  return 4.0 * std::max(q, 0.0);
}

std::vector<double> homodyne_density(const QuantumState& state, std::span<const double> xs) {
  const Vector amp = position_amplitudes(state, xs);
  std::vector<double> p(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) p[k] = std::norm(amp[static_cast<Eigen::Index>(k)]);
  return p;
}

double cfi_from_states(const QuantumState& minus, const QuantumState& mid,
                       const QuantumState& plus, double dlambda, const HomodyneGrid& grid) {
  const double half = grid.half_width > 0.0 ? grid.half_width : kGridWidth * std::sqrt(var_x(mid));
  const double step = grid.step > 0.0 ? grid.step : half / 2000.0;
  const double centre = grid.centred ? grid.centre : mean_x(mid);
  const int count = static_cast<int>(std::lround(2.0 * half / step)) + 1;
  std::vector<double> xs(count);
  for (int k = 0; k < count; ++k) xs[k] = centre - half + k * step;

  const std::vector<double> p = homodyne_density(mid, xs);
  const double outside = 1.0 - trapezoid(p, step);
  if (outside > 1e-8) {
    std::ostringstream msg;
    msg << "homodyne grid misses probability " << outside;
    throw Error(ErrorCode::GridCoverage, msg.str());
  }
  const std::vector<double> pp = homodyne_density(plus, xs);
  const std::vector<double> pm = homodyne_density(minus, xs);
  std::vector<double> integrand(count, 0.0);
  for (int k = 0; k < count; ++k) {
    if (p[k] < 1e-14) continue;
    const double dp = (pp[k] - pm[k]) / (2.0 * dlambda);
    integrand[k] = dp * dp / p[k];
  }
  return trapezoid(integrand, step);
}

double cfi_homodyne(double lambda, double s, const QuantumState& state, const HomodyneGrid& grid,
                    double dlambda) {
  require_stable(lambda);
  check_dlambda(lambda, dlambda);
  state.require_adequate();
  const int n = state.shape().cutoff();
  const QuantumState mid = Propagator(hamiltonian_effective(lambda, n)).apply(state, s);
  check_tail(mid, s);
  const QuantumState plus = Propagator(hamiltonian_effective(lambda + dlambda, n)).apply(state, s);
  const QuantumState minus =
      Propagator(hamiltonian_effective(lambda - dlambda, n)).apply(state, s);
  return cfi_from_states(minus, mid, plus, dlambda, grid);
}

double error_propagation(double lambda, double s, const StateKind& kind, EvaluationPath path,
                         int cutoff) {
  require_stable(lambda);
  if (path == EvaluationPath::analytic) {
    const QuadratureMoments m = analytic_moments(kind, lambda, s);
    return susceptibility_ratio(m.susceptibility, m.var_x);
  }
  constexpr double kStep = 1e-5;
  check_dlambda(lambda, kStep);
  const double times[] = {s};
  const EffectiveRun mid = evolve_effective(lambda, kind, times, cutoff);
  const EffectiveRun plus = evolve_effective(lambda + kStep, kind, times, mid.cutoff);
  const EffectiveRun minus = evolve_effective(lambda - kStep, kind, times, mid.cutoff);
  const double chi = (plus.trajectory.mean_x[0] - minus.trajectory.mean_x[0]) / (2.0 * kStep);
  return susceptibility_ratio(chi, mid.trajectory.var_x[0]);
}

MetrologySeries metrology_series(double lambda, std::span<const double> times,
                                 const StateKind& kind, const SeriesOptions& options) {
  require_stable(lambda);
  check_dlambda(lambda, options.dlambda);
  const double dl = options.dlambda;
  EffectiveRun run = evolve_effective(lambda, kind, times, options.cutoff, true);
  const int n = run.cutoff;

  MetrologySeries out;
  out.lambda = lambda;
  out.kind = kind;
  out.cutoff = n;
  out.times.assign(times.begin(), times.end());
  out.mean_x = run.trajectory.mean_x;
  out.var_x = run.trajectory.var_x;

  const QuantumState psi0 = make_state(kind, n);
  const GeneratorDecomposition gd = generator_decomposition(lambda, n);
  const double var_p2 = variance(as_hermitian(2.0 * gd.H0), psi0);
  const Propagator up(hamiltonian_effective(lambda + dl, n));
  const Propagator um(hamiltonian_effective(lambda - dl, n));
  const FockOperator x = mechanical_x(psi0.shape());

  double max_sd = 0.0;
  for (const double v : out.var_x) max_sd = std::max(max_sd, std::sqrt(v));
  HomodyneGrid grid;
  grid.half_width = kGridWidth * max_sd;
  grid.step = grid.half_width / 2000.0;

  for (std::size_t k = 0; k < times.size(); ++k) {
    const double s = times[k];
    const QuantumState& mid = run.trajectory.states[k];
    const QuantumState plus = up.apply(psi0, s);
    const QuantumState minus = um.apply(psi0, s);
    const double qfi = qfi_exact(gd, lambda, s, psi0);
    out.qfi_exact.push_back(qfi);
    out.qfi_asymptotic.push_back(qfi_asymptotic(lambda, s, var_p2));
    const double chi =
        (expectation(x, plus).real() - expectation(x, minus).real()) / (2.0 * dl);
    const double err = susceptibility_ratio(chi, out.var_x[k]);
    out.err_prop.push_back(err);
    double cfi = std::numeric_limits<double>::quiet_NaN();
    if (options.with_cfi) {
      grid.centre = out.mean_x[k];
      grid.centred = true;
      cfi = cfi_from_states(minus, mid, plus, dl, grid);
      const double tol = 1e-6 * qfi;
      if (qfi < cfi - tol || cfi < err - tol) {
        std::ostringstream msg;
        msg << "ordering qfi >= cfi >= err_prop broken at s = " << s << ": " << qfi << ", "
            << cfi << ", " << err;
        throw Error(ErrorCode::InternalConsistency, msg.str());
      }
    } else if (qfi < err - 1e-6 * qfi) {
      std::ostringstream msg;
      msg << "ordering qfi >= err_prop broken at s = " << s;
      throw Error(ErrorCode::InternalConsistency, msg.str());
    }
    out.cfi.push_back(cfi);
  }
  return out;
}

double finite_eta_ratio(double lambda0, double eta, const StateKind& kind, CorrectionPath path) {
  require_stable(lambda0);
  if (std::isinf(eta) && eta > 0.0) return 1.0;
  if (!(eta >= 10.0)) throw Error(ErrorCode::InvalidRegime, "finite-eta ratio needs eta >= 10");
  const double s = tau(lambda0, 1);
  const double base = error_propagation(lambda0, s, kind, EvaluationPath::analytic);
  if (!(base > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "error propagation vanishes at the working point");
  }

  double corrected = 0.0;
  if (path == CorrectionPath::analytic_lambda_eff) {
    const double le = lambda_eff(lambda0, eta);
    require_stable(le);
    const QuadratureMoments m = analytic_moments(kind, le, s);
    const double dle = (lambda0 + lambda0 * lambda0 * lambda0 / (3.0 * eta * eta)) / le;
    corrected = susceptibility_ratio(m.susceptibility * dle, m.var_x);
  } else {
    constexpr double kStep = 1e-5;
    check_dlambda(lambda0, kStep);
    CorrectedOptions opts;
    opts.path = CorrectionPath::two_mode_numeric;
    const double times[] = {s};
    const Trajectory mid = corrected_trajectory(lambda0, eta, kind, times, opts);
    const Trajectory plus = corrected_trajectory(lambda0 + kStep, eta, kind, times, opts);
    const Trajectory minus = corrected_trajectory(lambda0 - kStep, eta, kind, times, opts);
    const double chi = (plus.mean_x[0] - minus.mean_x[0]) / (2.0 * kStep);
    corrected = susceptibility_ratio(chi, mid.var_x[0]);
  }
  return corrected / base;
}

double working_point_relation(double lambda, double eta, WorkingPointForm form) {
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be positive");
  const double l2 = lambda * lambda;
  const double first =
      form == WorkingPointForm::verbatim ? 4.0 * (1.0 - lambda) * (1.0 - lambda) : 4.0 * (1.0 - l2);
  const double second = std::isinf(eta) ? 0.0 : l2 * l2 / (eta * eta);
  return std::log10(first + second) / 3.0;
}

Peak refine_peak(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size() || times.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "peak search needs matching non-empty series");
  }
  const auto it = std::max_element(values.begin(), values.end());
  const std::size_t i = static_cast<std::size_t>(it - values.begin());
  Peak peak{times[i], values[i], i};
  if (i == 0 || i + 1 == values.size()) return peak;

  const double x0 = times[i - 1], x1 = times[i], x2 = times[i + 1];
  const double y0 = values[i - 1], y1 = values[i], y2 = values[i + 1];
  const double denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
  const double a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
  const double b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
  const double c =
      (x1 * x2 * (x1 - x2) * y0 + x2 * x0 * (x2 - x0) * y1 + x0 * x1 * (x0 - x1) * y2) / denom;
  if (!(a < 0.0)) return peak;
  peak.s = -b / (2.0 * a);
  peak.value = c - b * b / (4.0 * a);
  return peak;
}

}  // namespace comsense
