#pragma once

#include "sdae/types.hpp"

namespace sdae {

/// A linear subspace of R^n stored as an orthonormal basis matrix.
///
/// Instances are immutable after construction and safe to share between
/// threads. The zero-dimensional subspace is a first-class value represented
/// by an n x 0 basis. The rank tolerance used when the subspace was extracted
/// from a generating matrix is kept alongside the basis.
class Subspace {
public:
  /// Column space (image) of an arbitrary matrix at rank tolerance `tol`.
  /// A negative tolerance selects max(rows, cols) * eps * sigma_max.
  static Subspace column_space(const Matrix& m, double tol = -1.0);

  /// Null space {x : m x = 0}. The matrix may have zero rows.
  static Subspace kernel(const Matrix& m, double tol = -1.0);

  static Subspace zero(Index ambient_dim);
  static Subspace full(Index ambient_dim);

  /// Wraps an already-orthonormal basis (checked to 1e-10).
  static Subspace from_orthonormal(Matrix basis, double tol = 0.0);

  Index ambient_dim() const { return basis_.rows(); }
  Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  double tol() const { return tol_; }

  Subspace intersect(const Subspace& other) const;
  Subspace sum(const Subspace& other) const;
  Subspace complement() const;

  /// Set-valued preimage {x : m x in this}; m maps R^cols(m) -> R^ambient.
  Subspace preimage(const Matrix& m, double tol = -1.0) const;

  /// Image under an invertible map: the dimension is preserved by
  /// construction, no rank decision is made.
  Subspace map_through(const Matrix& m) const;

  /// Equality as subspaces: equal dimensions and largest principal angle
  /// below `angle_tol` (radians). Invariant under orthogonal changes of basis.
  bool equals(const Subspace& other, double angle_tol = 1e-8) const;

  /// Membership test: the projection residual of v is below tol * |v|.
  bool contains(const Vector& v, double tol = 1e-9) const;

  /// Orthogonal projection of v onto the subspace.
  Vector project(const Vector& v) const;

private:
  Subspace(Matrix basis, double tol) : basis_(std::move(basis)), tol_(tol) {}

  Matrix basis_;  // ambient_dim x dim, orthonormal columns
  double tol_;
};

/// Default numerical-rank tolerance: max(rows, cols) * eps * sigma_max.
double default_rank_tol(const Matrix& m, double sigma_max);

}  // namespace sdae
