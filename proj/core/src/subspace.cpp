#include "sdae/subspace.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace sdae {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Index rank_from_singular_values(const Vector& sv, double tol) {
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++r;
  }
  return r;
}

}  // namespace

double default_rank_tol(const Matrix& m, double sigma_max) {
  return static_cast<double>(std::max(m.rows(), m.cols())) * kEps * sigma_max;
}

Subspace Subspace::column_space(const Matrix& m, double tol) {
  require_finite(m, "column_space");
  if (m.rows() == 0) return Subspace(Matrix::Zero(0, 0), 0.0);
  if (m.cols() == 0) return zero(m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  const double sigma_max = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  if (tol < 0) tol = default_rank_tol(m, sigma_max);
  const Index r = rank_from_singular_values(svd.singularValues(), tol);
  return Subspace(svd.matrixU().leftCols(r), tol);
}

Subspace Subspace::kernel(const Matrix& m, double tol) {
  require_finite(m, "kernel");
  if (m.rows() == 0 || m.cols() == 0) return full(m.cols());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const double sigma_max = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  if (tol < 0) tol = default_rank_tol(m, sigma_max);
  const Index r = rank_from_singular_values(svd.singularValues(), tol);
  return Subspace(svd.matrixV().rightCols(m.cols() - r), tol);
}

Subspace Subspace::zero(Index ambient_dim) {
  return Subspace(Matrix::Zero(ambient_dim, 0), 0.0);
}

Subspace Subspace::full(Index ambient_dim) {
  return Subspace(Matrix::Identity(ambient_dim, ambient_dim), 0.0);
}

Subspace Subspace::from_orthonormal(Matrix basis, double tol) {
  require_finite(basis, "from_orthonormal");
  const Matrix gram = basis.transpose() * basis;
  const double dev =
      (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (basis.cols() > 0 && dev > 1e-10)
    throw InvalidArgumentError("from_orthonormal: basis is not orthonormal");
  return Subspace(std::move(basis), tol);
}

Subspace Subspace::intersect(const Subspace& other) const {
  if (ambient_dim() != other.ambient_dim())
    throw DimensionError("intersect: ambient dimensions differ");
  // x is in both subspaces iff both complements annihilate it.
  const Matrix c1 = complement().basis_.transpose();
  const Matrix c2 = other.complement().basis_.transpose();
  Matrix stacked(c1.rows() + c2.rows(), ambient_dim());
  stacked.topRows(c1.rows()) = c1;
  stacked.bottomRows(c2.rows()) = c2;
  return kernel(stacked);
}

Subspace Subspace::sum(const Subspace& other) const {
  if (ambient_dim() != other.ambient_dim())
    throw DimensionError("sum: ambient dimensions differ");
  Matrix joined(ambient_dim(), dim() + other.dim());
  joined.leftCols(dim()) = basis_;
  joined.rightCols(other.dim()) = other.basis_;
  return column_space(joined);
}

Subspace Subspace::complement() const {
  return kernel(basis_.transpose());
}

Subspace Subspace::preimage(const Matrix& m, double tol) const {
  if (m.rows() != ambient_dim())
    throw DimensionError("preimage: map codomain does not match ambient dimension");
  // m x in S  <=>  (basis of S-perp)^T m x = 0.
  return kernel(complement().basis_.transpose() * m, tol);
}

Subspace Subspace::map_through(const Matrix& m) const {
  if (m.cols() != ambient_dim())
    throw DimensionError("map_through: map domain does not match ambient dimension");
  require(m.rows() == m.cols(), "map_through: map must be square (invertible)");
  const Matrix image = m * basis_;
  Eigen::HouseholderQR<Matrix> qr(image);
  const Matrix q =
      qr.householderQ() * Matrix::Identity(image.rows(), image.cols());
  return Subspace(q, tol_);
}

bool Subspace::equals(const Subspace& other, double angle_tol) const {
  if (ambient_dim() != other.ambient_dim()) return false;
  if (dim() != other.dim()) return false;
  if (dim() == 0) return true;
  // sin of the largest principal angle, well conditioned for tiny angles.
  const Matrix resid = other.basis_ - basis_ * (basis_.transpose() * other.basis_);
  Eigen::JacobiSVD<Matrix> svd(resid);
  const double s = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  return std::asin(std::min(1.0, s)) < angle_tol;
}

bool Subspace::contains(const Vector& v, double tol) const {
  if (v.size() != ambient_dim())
    throw DimensionError("contains: vector dimension mismatch");
  const double resid = (v - project(v)).norm();
  return resid <= tol * v.norm();
}

Vector Subspace::project(const Vector& v) const {
  if (v.size() != ambient_dim())
    throw DimensionError("project: vector dimension mismatch");
  return basis_ * (basis_.transpose() * v);
}

}  // namespace sdae
