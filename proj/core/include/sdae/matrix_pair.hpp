#pragma once

#include <utility>
#include <vector>

#include "sdae/subspace.hpp"
#include "sdae/types.hpp"

namespace sdae {

/// A square matrix pair (E, A) defining the implicit dynamics E x' = A x.
struct MatrixPair {
  Matrix E;
  Matrix A;

  MatrixPair(Matrix e, Matrix a);
  Index n() const { return E.rows(); }
};

/// Quasi-Weierstrass data: S E T = blkdiag(I, N), S A T = blkdiag(J, I)
/// with N nilpotent of the stored index (0 when the nilpotent block is empty).
struct QwfData {
  Matrix S;
  Matrix T;
  Matrix J;  // n1 x n1
  Matrix N;  // n2 x n2, nilpotent
  Index n1 = 0;
  int nilpotency_index = 0;
};

/// Full decomposition of a regular pair: quasi-Weierstrass transformation,
/// consistency projector and the derived flow/impulse matrices.
struct PairDecomposition {
  MatrixPair pair;
  QwfData qwf;
  Matrix Pi;     // consistency projector, Pi^2 = Pi
  Matrix Adiff;  // differential flow matrix, Adiff Pi = Pi Adiff = Adiff
  Matrix Eimp;   // impulse matrix, nilpotent, Eimp Pi = Pi Eimp = 0
  Subspace consistency_space;  // im Pi
  std::vector<std::string> warnings;
};

/// Limits of the two nested subspace recursions
///   V_0 = R^n, V_{i+1} = A^{-1}(E V_i)     and
///   W_0 = {0}, W_{i+1} = E^{-1}(A W_i),
/// with set-valued preimages; fixpoints are reached in at most n steps.
/// For a regular pair the limits are complementary.
std::pair<Subspace, Subspace> wong_limits(const MatrixPair& pair);

/// True iff det(sE - A) is not identically zero. Combines the subspace
/// direct-sum test with a randomized full-rank probe of lambda E - A at n+1
/// fixed pseudo-random values; disagreement raises a diagnostic error.
bool is_regular(const MatrixPair& pair);

/// Decomposes a regular pair. Throws NotRegularError otherwise. A condition
/// number of the coordinate change above 1e12 attaches a warning.
PairDecomposition decompose(const MatrixPair& pair);

/// Projected output matrix C * Pi.
Matrix cdiff(const PairDecomposition& dec, const Matrix& C);

/// Matrix exponential expm(M * t) via scaling-and-squaring. Throws on
/// non-finite input or overflowing result.
Matrix expm(const Matrix& m, double t = 1.0);

}  // namespace sdae
