#pragma once

#include <optional>

#include "comsense/fock.hpp"

namespace comsense {

/// Eigendecomposition H = V diag(E) V^+ of a dense Hermitian matrix, kept so
/// that exp(-i H s) can be applied for many s without refactoring. Real
/// symmetric input is decomposed with the real solver.
class HermitianSpectrum {
 public:
  explicit HermitianSpectrum(const Matrix& h);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  bool real() const noexcept { return real_vectors_.has_value(); }
  Matrix vectors() const;

  /// exp(-i H s) as a dense matrix.
  Matrix exp_i(double s) const;
  /// exp(-i H s) v.
  Vector apply_exp_i(const Vector& v, double s) const;

 private:
  Vector to_eigenbasis(const Vector& v) const;
  Vector from_eigenbasis(const Vector& c) const;

  Eigen::VectorXd values_;
  std::optional<Eigen::MatrixXd> real_vectors_;
  Matrix complex_vectors_;
};

/// exp(K) for anti-Hermitian K, computed as exp(-i H) with H = iK.
Matrix exp_antihermitian(const Matrix& k);

}  // namespace comsense
