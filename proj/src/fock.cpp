#include "comsense/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "comsense/spectral.hpp"

namespace comsense {
namespace {

void check_cutoff(int cutoff) {
  if (cutoff < 2) {
    throw Error(ErrorCode::InvalidCutoff,
                "cutoff must be at least 2, got " + std::to_string(cutoff));
  }
}

void check_same_shape(const FockShape& a, const FockShape& b, const char* what) {
  if (!(a == b)) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": Fock shapes differ");
  }
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double compute_tail_mass(const FockShape& shape, const Vector& amps) {
  if (shape.modes() == 1) {
    const int start = tail_start(shape.cutoff());
    return amps.tail(shape.cutoff() - start).squaredNorm();
  }
  const int na = shape.cavity_cutoff();
  const int nb = shape.mechanical_cutoff();
  const int start_a = tail_start(na);
  const int start_b = tail_start(nb);
  double tail_a = 0.0;
  double tail_b = 0.0;
  for (int ia = 0; ia < na; ++ia) {
    for (int ib = 0; ib < nb; ++ib) {
      const double p = std::norm(amps[ia * nb + ib]);
      if (ia >= start_a) tail_a += p;
      if (ib >= start_b) tail_b += p;
    }
  }
  return std::max(tail_a, tail_b);
}

Eigen::MatrixXd annihilation_matrix(int cutoff) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n) b(n - 1, n) = std::sqrt(static_cast<double>(n));
  return b;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

void check_state_operator(const FockOperator& op, const QuantumState& state) {
  if (!(op.shape() == state.shape())) {
    throw Error(ErrorCode::DimensionMismatch, "operator and state live on different Fock spaces");
  }
}

}  // namespace

// ---------------------------------------------------------------- FockShape

FockShape FockShape::single(int cutoff) {
  check_cutoff(cutoff);
  return FockShape(1, cutoff, 0);
}

FockShape FockShape::two_mode(int cavity_cutoff, int mechanical_cutoff) {
  check_cutoff(cavity_cutoff);
  check_cutoff(mechanical_cutoff);
  return FockShape(2, cavity_cutoff, mechanical_cutoff);
}

// ------------------------------------------------------------- FockOperator

FockOperator::FockOperator(FockShape shape, Matrix matrix, bool hermitian)
    : shape_(shape), matrix_(std::move(matrix)), hermitian_(false) {
  if (matrix_.rows() != shape_.dim() || matrix_.cols() != shape_.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix is " + std::to_string(matrix_.rows()) + "x" +
                    std::to_string(matrix_.cols()) + ", shape needs " +
                    std::to_string(shape_.dim()));
  }
  if (hermitian) *this = as_hermitian(*this);
}

bool FockOperator::is_real() const {
  return matrix_.size() == 0 || matrix_.imag().cwiseAbs().maxCoeff() == 0.0;
}

FockOperator FockOperator::adjoint() const {
  FockOperator out = *this;
  out.matrix_ = matrix_.adjoint();
  return out;
}

FockOperator& FockOperator::operator+=(const FockOperator& other) {
  check_same_shape(shape_, other.shape_, "operator+");
  matrix_ += other.matrix_;
  hermitian_ = hermitian_ && other.hermitian_;
  return *this;
}

FockOperator& FockOperator::operator-=(const FockOperator& other) {
  check_same_shape(shape_, other.shape_, "operator-");
  matrix_ -= other.matrix_;
  hermitian_ = hermitian_ && other.hermitian_;
  return *this;
}

FockOperator& FockOperator::operator*=(double scale) {
  matrix_ *= scale;
  return *this;
}

FockOperator operator*(cplx scale, const FockOperator& op) {
  FockOperator out(op.shape_, scale * op.matrix_);
  out.hermitian_ = op.hermitian_ && scale.imag() == 0.0;
  return out;
}

FockOperator operator*(const FockOperator& lhs, const FockOperator& rhs) {
  check_same_shape(lhs.shape_, rhs.shape_, "operator*");
  return FockOperator(lhs.shape_, lhs.matrix_ * rhs.matrix_);
}

FockOperator as_hermitian(const FockOperator& op, double tol) {
  const Matrix& m = op.matrix();
  const double deviation = max_abs(m - m.adjoint());
  if (deviation > tol * std::max(1.0, max_abs(m))) {
    throw Error(ErrorCode::NotHermitian,
                "matrix deviates from its adjoint by " + std::to_string(deviation));
  }
  FockOperator out(op.shape(), 0.5 * (m + m.adjoint()));
  out.hermitian_ = true;
  return out;
}

FockOperator commutator(const FockOperator& a, const FockOperator& b) { return a * b - b * a; }

FockOperator anticommutator(const FockOperator& a, const FockOperator& b) {
  return a * b + b * a;
}

// ------------------------------------------------------------- QuantumState

int tail_start(int cutoff) noexcept { return cutoff - (cutoff + 9) / 10; }

QuantumState::QuantumState(FockShape shape, Vector amplitudes)
    : shape_(shape), amplitudes_(std::move(amplitudes)), tail_mass_(0.0) {
  if (amplitudes_.size() != shape_.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "amplitude vector does not match Fock shape");
  }
  const double norm2 = amplitudes_.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-10) {
    throw Error(ErrorCode::InvalidArgument,
                "state is not normalized: |psi|^2 = " + std::to_string(norm2));
  }
  tail_mass_ = compute_tail_mass(shape_, amplitudes_);
}

QuantumState QuantumState::normalized(FockShape shape, Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (norm == 0.0) throw Error(ErrorCode::InvalidArgument, "cannot normalize the zero vector");
  amplitudes /= norm;
  return QuantumState(shape, std::move(amplitudes));
}

void QuantumState::require_adequate(double tol) const {
  if (tail_mass_ > tol) {
    throw Error(ErrorCode::CutoffTooSmall,
                "tail mass " + std::to_string(tail_mass_) + " exceeds " + std::to_string(tol) +
                    " at cutoff " + std::to_string(shape_.cutoff()));
  }
}

// -------------------------------------------------------------- constructors

Ladder ladder(int cutoff) {
  const FockShape shape = FockShape::single(cutoff);
  const Matrix b = annihilation_matrix(cutoff).cast<cplx>();
  return {FockOperator(shape, b), FockOperator(shape, b.adjoint())};
}

Quadratures quadratures(int cutoff) {
  const FockShape shape = FockShape::single(cutoff);
  const Matrix b = annihilation_matrix(cutoff).cast<cplx>();
  const Matrix bd = b.adjoint();
  const double s = 1.0 / std::numbers::sqrt2;
  return {FockOperator(shape, s * (bd + b), true), FockOperator(shape, kI * s * (bd - b), true)};
}

FockOperator number_operator(int cutoff) {
  const FockShape shape = FockShape::single(cutoff);
  Matrix n = Matrix::Zero(cutoff, cutoff);
  for (int k = 0; k < cutoff; ++k) n(k, k) = static_cast<double>(k);
  return FockOperator(shape, std::move(n), true);
}

FockOperator identity(int cutoff) {
  return FockOperator(FockShape::single(cutoff), Matrix::Identity(cutoff, cutoff), true);
}

QuantumState basis_state(int n, int cutoff) {
  const FockShape shape = FockShape::single(cutoff);
  if (n < 0 || n >= cutoff) {
    throw Error(ErrorCode::InvalidArgument,
                "basis index " + std::to_string(n) + " outside cutoff " + std::to_string(cutoff));
  }
  Vector v = Vector::Zero(cutoff);
  v[n] = 1.0;
  return QuantumState(shape, std::move(v));
}

QuantumState superposition_state(int cutoff) {
  const FockShape shape = FockShape::single(cutoff);
  Vector v = Vector::Zero(cutoff);
  v[0] = 1.0 / std::numbers::sqrt2;
  v[1] = kI / std::numbers::sqrt2;
  return QuantumState(shape, std::move(v));
}

QuantumState coherent_state(cplx alpha, int cutoff) {
  const FockShape shape = FockShape::single(cutoff);
  if (std::norm(alpha) > cutoff / 4.0) {
    throw Error(ErrorCode::CutoffTooSmall,
                "|alpha|^2 = " + std::to_string(std::norm(alpha)) + " needs cutoff >= " +
                    std::to_string(static_cast<int>(std::ceil(4.0 * std::norm(alpha)))));
  }
  Vector v(cutoff);
  cplx c = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < cutoff; ++n) {
    v[n] = c;
    c *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return QuantumState::normalized(shape, std::move(v));
}

QuantumState product_state(const QuantumState& cavity, const QuantumState& mechanical) {
  if (cavity.shape().modes() != 1 || mechanical.shape().modes() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "product_state expects single-mode factors");
  }
  const int na = cavity.dim();
  const int nb = mechanical.dim();
  Vector v(na * nb);
  for (int ia = 0; ia < na; ++ia) {
    v.segment(ia * nb, nb) = cavity.amplitudes()[ia] * mechanical.amplitudes();
  }
  return QuantumState::normalized(FockShape::two_mode(na, nb), std::move(v));
}

// --------------------------------------------------------------- statistics

cplx expectation(const FockOperator& op, const QuantumState& state) {
  check_state_operator(op, state);
  const Vector& psi = state.amplitudes();
  return psi.dot(op.matrix() * psi);
}

double variance(const FockOperator& op, const QuantumState& state) {
  check_state_operator(op, state);
  if (!op.hermitian()) {
    throw Error(ErrorCode::NotHermitian, "variance requested for a non-Hermitian operator");
  }
  const Vector o_psi = op.matrix() * state.amplitudes();
  const double mean = state.amplitudes().dot(o_psi).real();
  double var = o_psi.squaredNorm() - mean * mean;
  if (var < 0.0 && var >= -1e-12 * std::max(1.0, o_psi.squaredNorm())) var = 0.0;
  return var;
}

double symmetrized_covariance(const FockOperator& a, const FockOperator& b,
                              const QuantumState& state) {
  check_state_operator(a, state);
  check_state_operator(b, state);
  if (!a.hermitian() || !b.hermitian()) {
    throw Error(ErrorCode::NotHermitian, "covariance requested for non-Hermitian operators");
  }
  const Vector& psi = state.amplitudes();
  const Vector a_psi = a.matrix() * psi;
  const Vector b_psi = b.matrix() * psi;
  const double mean_a = psi.dot(a_psi).real();
  const double mean_b = psi.dot(b_psi).real();
  return 2.0 * a_psi.dot(b_psi).real() - 2.0 * mean_a * mean_b;
}

// ----------------------------------------------------------- two-mode maps

FockOperator tensor(const FockOperator& a, const FockOperator& b) {
  if (a.shape().modes() != 1 || b.shape().modes() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "tensor expects single-mode operators");
  }
  FockOperator out(FockShape::two_mode(a.dim(), b.dim()), kron(a.matrix(), b.matrix()));
  if (a.hermitian() && b.hermitian()) return as_hermitian(out);
  return out;
}

FockOperator embed(const FockOperator& op, Mode which, std::pair<int, int> cutoffs) {
  if (op.shape().modes() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "embed expects a single-mode operator");
  }
  const auto [na, nb] = cutoffs;
  if (which == Mode::cavity) {
    if (op.dim() != na) throw Error(ErrorCode::DimensionMismatch, "cavity cutoff mismatch");
    return tensor(op, identity(nb));
  }
  if (op.dim() != nb) throw Error(ErrorCode::DimensionMismatch, "mechanical cutoff mismatch");
  return tensor(identity(na), op);
}

FockOperator squeeze_matrix(double r, int cutoff) {
  const FockShape shape = FockShape::single(cutoff);
  if (std::abs(r) > 3.0) {
    throw Error(ErrorCode::InvalidArgument, "squeeze parameter |r| must be <= 3");
  }
  if (r == 0.0) return identity(cutoff);
  const Matrix b = annihilation_matrix(cutoff).cast<cplx>();
  const Matrix bd = b.adjoint();
  const Matrix generator = 0.5 * r * (bd * bd - b * b);
  return FockOperator(shape, exp_antihermitian(generator));
}

// ------------------------------------------------------ position amplitudes

cplx position_amplitude(const QuantumState& state, double x) {
  const double xs[1] = {x};
  return position_amplitudes(state, xs)[0];
}

Vector position_amplitudes(const QuantumState& state, std::span<const double> xs) {
  if (state.shape().modes() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "position amplitudes need a single-mode state");
  }
  const Vector& psi = state.amplitudes();
  const int n_max = state.dim();
  // Recurrence runs on rescaled values; `log_scale` tracks the factor so that
  // e^{-x^2/2} never underflows before the sum is formed.
  constexpr double kBig = 1e150;
  const double log_big = std::log(kBig);
  const double norm0 = std::pow(std::numbers::pi, -0.25);

  Vector out(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double x = xs[k];
    double prev = 0.0;
    double cur = 1.0;
    double log_scale = 0.0;
    cplx sum = psi[0] * cur;
    for (int n = 0; n + 1 < n_max; ++n) {
      const double next = x * std::sqrt(2.0 / (n + 1)) * cur - std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
      prev = cur;
      cur = next;
      sum += psi[n + 1] * cur;
      if (std::abs(cur) > kBig) {
        prev /= kBig;
        cur /= kBig;
        sum /= kBig;
        log_scale += log_big;
      }
    }
    out[static_cast<Eigen::Index>(k)] = sum * norm0 * std::exp(log_scale - 0.5 * x * x);
  }
  return out;
}

// ------------------------------------------------------------ interior views

Matrix interior_block(const FockOperator& op, double fraction) {
  const FockShape& shape = op.shape();
  if (shape.modes() == 1) {
    const int keep = std::max(1, static_cast<int>(std::floor(fraction * shape.cutoff())));
    return op.matrix().topLeftCorner(keep, keep);
  }
  return interior_block(op,
                        std::max(1, static_cast<int>(std::floor(fraction * shape.cavity_cutoff()))),
                        std::max(1, static_cast<int>(std::floor(fraction * shape.mechanical_cutoff()))));
}

Matrix interior_block(const FockOperator& op, int keep_cavity, int keep_mechanical) {
  const FockShape& shape = op.shape();
  if (shape.modes() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "per-mode interior block needs a two-mode operator");
  }
  const int nb = shape.mechanical_cutoff();
  keep_cavity = std::clamp(keep_cavity, 1, shape.cavity_cutoff());
  keep_mechanical = std::clamp(keep_mechanical, 1, nb);
  std::vector<Eigen::Index> idx;
  idx.reserve(static_cast<std::size_t>(keep_cavity * keep_mechanical));
  for (int ia = 0; ia < keep_cavity; ++ia) {
    for (int ib = 0; ib < keep_mechanical; ++ib) idx.push_back(ia * nb + ib);
  }
  return op.matrix()(idx, idx);
}

}  // namespace comsense
