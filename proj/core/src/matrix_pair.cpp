#include "sdae/matrix_pair.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>
#include <sstream>

#include "linalg_util.hpp"

namespace sdae {

using detail::cond_number;
using detail::spectral_norm;

MatrixPair::MatrixPair(Matrix e, Matrix a) : E(std::move(e)), A(std::move(a)) {
  require(E.rows() == E.cols(), "MatrixPair: E must be square");
  require(A.rows() == E.rows() && A.cols() == E.cols(),
          "MatrixPair: A must match the shape of E");
  require_finite(E, "MatrixPair.E");
  require_finite(A, "MatrixPair.A");
}

std::pair<Subspace, Subspace> wong_limits(const MatrixPair& pair) {
  const Index n = pair.n();
  // Chained products pick up rounding noise on the scale of the pair, not of
  // the intermediate products; use the safety-factored tolerance throughout.
  const double tol_e = detail::chain_tol(pair.E);
  const double tol_a = detail::chain_tol(pair.A);
  Subspace v = Subspace::full(n);
  for (Index i = 0; i < n; ++i) {
    Subspace next = Subspace::column_space(pair.E * v.basis(), tol_e)
                        .preimage(pair.A, tol_a);
    if (next.dim() == v.dim()) break;
    v = std::move(next);
  }
  Subspace w = Subspace::zero(n);
  for (Index i = 0; i < n; ++i) {
    Subspace next = Subspace::column_space(pair.A * w.basis(), tol_a)
                        .preimage(pair.E, tol_e);
    if (next.dim() == w.dim()) break;
    w = std::move(next);
  }
  return {v, w};
}

namespace {

// The joined basis is orthonormal columnwise, so the plain tolerance applies.
bool wong_direct_sum(const MatrixPair& pair, const Subspace& v, const Subspace& w) {
  if (v.dim() + w.dim() != pair.n()) return false;
  return Subspace::column_space(detail::hcat(v.basis(), w.basis())).dim() == pair.n();
}

// Full-rank probe of lambda E - A at n+1 fixed pseudo-random points. A pencil
// of degree <= n cannot vanish at n+1 distinct points unless it is identically
// singular.
bool determinant_probe(const MatrixPair& pair) {
  const Index n = pair.n();
  if (n == 0) return true;
  std::mt19937_64 rng(0x5dae5eedULL);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  const double scale = pair.E.norm() + pair.A.norm();
  if (scale == 0.0) return false;
  for (Index i = 0; i <= n; ++i) {
    const double lambda = dist(rng);
    const Matrix pencil = lambda * pair.E - pair.A;
    Eigen::JacobiSVD<Matrix> svd(pencil);
    const Vector& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= default_rank_tol(pencil, sv(0))) return false;
  }
  return true;
}

}  // namespace

bool is_regular(const MatrixPair& pair) {
  auto [v, w] = wong_limits(pair);
  const bool geometric = wong_direct_sum(pair, v, w);
  const bool probe = determinant_probe(pair);
  if (geometric != probe) {
    std::ostringstream oss;
    oss << "is_regular: the Wong direct-sum test (" << geometric
        << ") and the determinant probe (" << probe
        << ") disagree; the pair is too ill conditioned to classify";
    throw Error(oss.str());
  }
  return geometric;
}

PairDecomposition decompose(const MatrixPair& pair) {
  const Index n = pair.n();
  auto [v, w] = wong_limits(pair);
  if (!wong_direct_sum(pair, v, w))
    throw NotRegularError("decompose: Wong limits do not span the state space");
  if (!determinant_probe(pair))
    throw NotRegularError("decompose: pencil singular at probe points");

  const Index n1 = v.dim();
  const Index n2 = n - n1;

  Matrix T = detail::hcat(v.basis(), w.basis());
  if (T.size() == 0) T = Matrix::Zero(n, n);
  Matrix ev_aw = detail::hcat(pair.E * v.basis(), pair.A * w.basis());
  Eigen::PartialPivLU<Matrix> lu(ev_aw);
  Matrix S = lu.inverse();
  if (!S.allFinite())
    throw NotRegularError("decompose: [E V*, A W*] is singular");

  const Matrix set = S * pair.E * T;
  const Matrix sat = S * pair.A * T;
  const double pair_scale = pair.E.norm() + pair.A.norm();
  const double block_tol = 1e-9 * (pair_scale > 0 ? pair_scale : 1.0);

  QwfData qwf;
  qwf.S = S;
  qwf.T = T;
  qwf.n1 = n1;
  qwf.J = sat.topLeftCorner(n1, n1);
  qwf.N = set.bottomRightCorner(n2, n2);

  // The construction guarantees the block structure; verify it numerically.
  Matrix set_expect = detail::blkdiag(Matrix::Identity(n1, n1), qwf.N);
  Matrix sat_expect = detail::blkdiag(qwf.J, Matrix::Identity(n2, n2));
  if ((set - set_expect).cwiseAbs().maxCoeff() > block_tol ||
      (sat - sat_expect).cwiseAbs().maxCoeff() > block_tol)
    throw Error("decompose: quasi-Weierstrass block structure not attained");

  if (n2 == 0) {
    qwf.nilpotency_index = 0;
  } else {
    const double nscale = std::max(1.0, qwf.N.norm());
    Matrix power = qwf.N;
    int nu = 1;
    while (power.norm() > 1e-9 * std::pow(nscale, nu) && nu <= n2) {
      power = power * qwf.N;
      ++nu;
    }
    if (nu > n2) throw Error("decompose: N block is not nilpotent");
    qwf.nilpotency_index = nu;
  }

  Eigen::PartialPivLU<Matrix> tlu(T);
  const Matrix t_inv = tlu.inverse();

  PairDecomposition dec{
      pair,
      qwf,
      T * detail::blkdiag(Matrix::Identity(n1, n1), Matrix::Zero(n2, n2)) * t_inv,
      T * detail::blkdiag(qwf.J, Matrix::Zero(n2, n2)) * t_inv,
      T * detail::blkdiag(Matrix::Zero(n1, n1), qwf.N) * t_inv,
      v,
      {}};

  const double cond = cond_number(T);
  if (cond > 1e12) {
    std::ostringstream oss;
    oss << "decompose: coordinate change is ill conditioned (cond(T) = " << cond
        << "); projector accuracy may degrade";
    dec.warnings.push_back(oss.str());
  }
  return dec;
}

Matrix cdiff(const PairDecomposition& dec, const Matrix& C) {
  if (C.cols() != dec.pair.n())
    throw DimensionError("cdiff: C must have n columns");
  return C * dec.Pi;
}

Matrix expm(const Matrix& m, double t) {
  require(m.rows() == m.cols(), "expm: matrix must be square");
  require_finite(m, "expm");
  require(std::isfinite(t), "expm: non-finite time");
  if (m.rows() == 0) return Matrix::Zero(0, 0);
  Matrix result = (m * t).exp();
  if (!result.allFinite())
    throw Error("expm: overflow for |M t| = " + std::to_string((m * t).norm()));
  return result;
}

}  // namespace sdae
