#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sdae/types.hpp"

namespace sdae::detail {

inline Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0 && a.rows() == 0) return b;
  if (b.cols() == 0 && b.rows() == 0) return a;
  Matrix out(std::max(a.rows(), b.rows()), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

inline Matrix vcat(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0 && a.cols() == 0) return b;
  if (b.rows() == 0 && b.cols() == 0) return a;
  Matrix out(a.rows() + b.rows(), std::max(a.cols(), b.cols()));
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

inline Vector vcat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out.head(a.size()) = a;
  out.tail(b.size()) = b;
  return out;
}

inline Matrix blkdiag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

/// Minimum-norm least-squares solution of a X = b.
inline Matrix solve_min_norm(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0) return Matrix::Zero(0, b.cols());
  if (a.rows() == 0) return Matrix::Zero(a.cols(), b.cols());
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  return cod.solve(b);
}

/// Largest singular value; zero for empty matrices.
inline double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Rank tolerance for chained subspace computations: products of the form
/// B^T M inherit rounding noise scaled by the norm of the full operator, so
/// the plain relative tolerance of the product is too tight. Frobenius norm
/// upper-bounds sigma_max.
inline double chain_tol(const Matrix& m) {
  return 256.0 * static_cast<double>(std::max(m.rows(), m.cols())) *
         std::numeric_limits<double>::epsilon() * m.norm();
}

inline double cond_number(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return svd.singularValues()(0) / smin;
}

}  // namespace sdae::detail
