#include "comsense/spectral.hpp"

#include <cmath>

namespace comsense {

HermitianSpectrum::HermitianSpectrum(const Matrix& h) {
  if (h.rows() != h.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "spectrum of a non-square matrix");
  }
  if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.real());
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::Divergence, "real symmetric eigensolver failed");
    }
    values_ = solver.eigenvalues();
    real_vectors_ = solver.eigenvectors();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::Divergence, "Hermitian eigensolver failed");
    }
    values_ = solver.eigenvalues();
    complex_vectors_ = solver.eigenvectors();
  }
}

Matrix HermitianSpectrum::vectors() const {
  return real_vectors_ ? Matrix(real_vectors_->cast<cplx>()) : complex_vectors_;
}

Vector HermitianSpectrum::to_eigenbasis(const Vector& v) const {
  if (real_vectors_) {
    const Eigen::VectorXd re = real_vectors_->transpose() * v.real();
    const Eigen::VectorXd im = real_vectors_->transpose() * v.imag();
    Vector c(re.size());
    c.real() = re;
    c.imag() = im;
    return c;
  }
  return complex_vectors_.adjoint() * v;
}

Vector HermitianSpectrum::from_eigenbasis(const Vector& c) const {
  if (real_vectors_) {
    const Eigen::VectorXd re = *real_vectors_ * c.real();
    const Eigen::VectorXd im = *real_vectors_ * c.imag();
    Vector v(re.size());
    v.real() = re;
    v.imag() = im;
    return v;
  }
  return complex_vectors_ * c;
}

Vector HermitianSpectrum::apply_exp_i(const Vector& v, double s) const {
  if (v.size() != values_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "vector does not match spectrum dimension");
  }
  if (s == 0.0) return v;
  Vector c = to_eigenbasis(v);
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    c[k] *= std::polar(1.0, -values_[k] * s);
  }
  return from_eigenbasis(c);
}

Matrix HermitianSpectrum::exp_i(double s) const {
  const Eigen::Index n = values_.size();
  if (s == 0.0) return Matrix::Identity(n, n);
  Vector phases(n);
  for (Eigen::Index k = 0; k < n; ++k) phases[k] = std::polar(1.0, -values_[k] * s);
  const Matrix v = vectors();
  return v * phases.asDiagonal() * v.adjoint();
}

Matrix exp_antihermitian(const Matrix& k) {
  const Matrix h = kI * k;
  // Hermitize against rounding in the product before decomposing.
  const Matrix hs = 0.5 * (h + h.adjoint());
  return HermitianSpectrum(hs).exp_i(1.0);
}

}  // namespace comsense
