#pragma once

// Truncated Fock-space operator algebra for one mode or a cavity (x) mechanical
// pair. Everything is a dense complex Eigen matrix; the mode ordering of
// two-mode spaces is always cavity (x) mechanical, so index = n_a * N_b + n_b.

#include <array>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "comsense/error.hpp"

namespace comsense {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

enum class Mode { cavity, mechanical };

/// Basis sizes per mode.
class FockShape {
 public:
  static FockShape single(int cutoff);
  static FockShape two_mode(int cavity_cutoff, int mechanical_cutoff);

  int modes() const noexcept { return modes_; }
  /// Cutoff of the only mode (single-mode) or of the mechanical mode.
  int cutoff() const noexcept { return modes_ == 1 ? cutoffs_[0] : cutoffs_[1]; }
  int cavity_cutoff() const noexcept { return modes_ == 2 ? cutoffs_[0] : 0; }
  int mechanical_cutoff() const noexcept { return cutoff(); }
  int dim() const noexcept { return modes_ == 1 ? cutoffs_[0] : cutoffs_[0] * cutoffs_[1]; }

  bool operator==(const FockShape&) const = default;

 private:
  FockShape(int modes, int first, int second) : cutoffs_{first, second}, modes_(modes) {}

  std::array<int, 2> cutoffs_;
  int modes_;
};

class FockOperator {
 public:
  /// If `hermitian` is set the matrix is checked against its adjoint and
  /// stored exactly symmetrized; a violation throws NotHermitian.
  FockOperator(FockShape shape, Matrix matrix, bool hermitian = false);

  const FockShape& shape() const noexcept { return shape_; }
  int dim() const noexcept { return shape_.dim(); }
  const Matrix& matrix() const noexcept { return matrix_; }
  bool hermitian() const noexcept { return hermitian_; }

  /// True when every entry has zero imaginary part.
  bool is_real() const;

  FockOperator adjoint() const;

  FockOperator& operator+=(const FockOperator& other);
  FockOperator& operator-=(const FockOperator& other);
  FockOperator& operator*=(double scale);

  friend FockOperator operator+(FockOperator lhs, const FockOperator& rhs) { return lhs += rhs; }
  friend FockOperator operator-(FockOperator lhs, const FockOperator& rhs) { return lhs -= rhs; }
  friend FockOperator operator*(double scale, FockOperator op) { return op *= scale; }
  friend FockOperator operator*(FockOperator op, double scale) { return op *= scale; }
  friend FockOperator operator*(cplx scale, const FockOperator& op);
  friend FockOperator operator-(const FockOperator& op) { return -1.0 * op; }
  /// Matrix product; the result is not flagged Hermitian.
  friend FockOperator operator*(const FockOperator& lhs, const FockOperator& rhs);

  friend FockOperator as_hermitian(const FockOperator& op, double tol);

 private:
  FockShape shape_;
  Matrix matrix_;
  bool hermitian_;
};

/// Re-flags `op` as Hermitian after checking max |M - M^+| against `tol`
/// scaled by max(1, max |M_ij|).
FockOperator as_hermitian(const FockOperator& op, double tol = 1e-12);

FockOperator commutator(const FockOperator& a, const FockOperator& b);
FockOperator anticommutator(const FockOperator& a, const FockOperator& b);

class QuantumState {
 public:
  /// Amplitudes must already be normalized to within 1e-10.
  QuantumState(FockShape shape, Vector amplitudes);

  /// Renormalizes `amplitudes` before construction.
  static QuantumState normalized(FockShape shape, Vector amplitudes);

  const FockShape& shape() const noexcept { return shape_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }
  int dim() const noexcept { return shape_.dim(); }

  /// Probability in the top 10% of basis indices (per mode marginal, max over
  /// modes for two-mode states).
  double tail_mass() const noexcept { return tail_mass_; }

  /// Throws CutoffTooSmall when tail_mass() exceeds `tol`.
  void require_adequate(double tol = 1e-8) const;

 private:
  FockShape shape_;
  Vector amplitudes_;
  double tail_mass_;
};

/// First index of the "top 10%" band used by tail-mass diagnostics.
int tail_start(int cutoff) noexcept;

struct Ladder {
  FockOperator annihilate;
  FockOperator create;
};

struct Quadratures {
  FockOperator x;
  FockOperator p;
};

Ladder ladder(int cutoff);
/// X = (b^+ + b)/sqrt2, P = i(b^+ - b)/sqrt2; vacuum Var X = 1/2.
Quadratures quadratures(int cutoff);
FockOperator number_operator(int cutoff);
FockOperator identity(int cutoff);

QuantumState basis_state(int n, int cutoff);
/// (|0> + i|1>)/sqrt2.
QuantumState superposition_state(int cutoff);
/// Truncated coherent state, renormalized. Requires |alpha|^2 <= cutoff/4.
QuantumState coherent_state(cplx alpha, int cutoff);
/// Cavity (x) mechanical product state.
QuantumState product_state(const QuantumState& cavity, const QuantumState& mechanical);

cplx expectation(const FockOperator& op, const QuantumState& state);
/// <O^2> - <O>^2 for Hermitian O; clamped to zero when within -1e-12.
double variance(const FockOperator& op, const QuantumState& state);
/// Symmetrized covariance <AB + BA> - 2<A><B> (twice the usual covariance).
double symmetrized_covariance(const FockOperator& a, const FockOperator& b,
                              const QuantumState& state);

/// Kronecker product of two single-mode operators; `a` acts on the cavity.
FockOperator tensor(const FockOperator& a, const FockOperator& b);
/// Pads a single-mode operator with the identity on the other mode.
FockOperator embed(const FockOperator& op, Mode which, std::pair<int, int> cutoffs);

/// exp[r (b^+2 - b^2)/2]. Acting on vacuum gives Var X = e^{2r}/2.
FockOperator squeeze_matrix(double r, int cutoff);

/// <x|psi> through the normalized Hermite-function recurrence.
cplx position_amplitude(const QuantumState& state, double x);
Vector position_amplitudes(const QuantumState& state, std::span<const double> xs);

/// Top-left block on the lowest `fraction` of the basis of a single-mode
/// operator, or the lowest `fraction` of each mode for a two-mode operator.
Matrix interior_block(const FockOperator& op, double fraction = 0.8);
/// Block on cavity indices < keep_cavity and mechanical indices < keep_mechanical.
Matrix interior_block(const FockOperator& op, int keep_cavity, int keep_mechanical);

}  // namespace comsense
