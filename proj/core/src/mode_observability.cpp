#include "sdae/mode_observability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>

#include "linalg_util.hpp"

namespace sdae {

using detail::hcat;
using detail::solve_min_norm;
using detail::spectral_norm;

void NoiseModel::perturb(ImpulseRecord& rec) {
  if (!active_) return;
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& coeff : rec.coeffs)
    for (Index i = 0; i < coeff.size(); ++i) coeff(i) *= 1.0 + eps_ * dist(rng_);
}

namespace {

bool reduced_pair_observable(const Matrix& S, const Matrix& R) {
  const Index r = S.rows();
  if (r == 0) return true;
  Matrix obs(r * R.rows(), r);
  Matrix spow = Matrix::Identity(r, r);
  for (Index i = 0; i < r; ++i) {
    obs.middleRows(i * R.rows(), R.rows()) = R * spow;
    spow = spow * S;
  }
  return Subspace::column_space(obs.transpose()).dim() == r;
}

}  // namespace

ModeObsData build_mode_obs(const Mode& mode) {
  ModeObsData d;
  d.dec = std::make_shared<const PairDecomposition>(mode.decomposition());
  d.C = mode.C();
  d.n = mode.n();
  d.ydim = mode.output_dim();
  const Index n = d.n;
  const Index y = d.ydim;
  const Matrix Cdiff = cdiff(*d.dec, d.C);

  d.Odiff.resize(n * y, n);
  Matrix apow = Matrix::Identity(n, n);
  for (Index i = 0; i < n; ++i) {
    d.Odiff.middleRows(i * y, y) = Cdiff * apow;
    apow = apow * d.dec->Adiff;
  }
  d.Oimp.resize((n - 1) * y, n);
  Matrix epow = d.dec->Eimp;
  for (Index i = 0; i + 1 < n; ++i) {
    d.Oimp.middleRows(i * y, y) = d.C * epow;
    epow = epow * d.dec->Eimp;
  }

  // Rank decisions on the observability matrices. Directions whose singular
  // values sit at the noise floor are invisible to any estimator; when the
  // reduced pair cannot see a retained direction, the cut is tightened and
  // the direction moves to the unobservable side (the conservative call).
  double odiff_tol = detail::chain_tol(d.Odiff);
  double oimp_tol = detail::chain_tol(d.Oimp);
  const double pi_tol = detail::chain_tol(d.dec->Pi);
  for (int attempt = 0;; ++attempt) {
    d.W = Subspace::kernel(d.Odiff, odiff_tol)
              .preimage(d.dec->Pi, pi_tol)
              .intersect(Subspace::kernel(d.Oimp, oimp_tol));
    d.Zmat = d.W.complement().basis();
    d.Zdiff = Subspace::column_space(d.Odiff.transpose(), odiff_tol).basis();
    d.Zimp = Subspace::column_space(d.Oimp.transpose(), oimp_tol).basis();
    d.Sdiff = d.Zdiff.transpose() * d.dec->Adiff * d.Zdiff;
    d.Rdiff = Cdiff * d.Zdiff;
    if (reduced_pair_observable(d.Sdiff, d.Rdiff)) break;
    if (attempt >= 4)
      throw Error("build_mode_obs: reduced pair lost observability");
    odiff_tol *= 64.0;
  }

  const Matrix combo = hcat(d.dec->Pi.transpose() * d.Zdiff, d.Zimp);
  d.Uobs = solve_min_norm(combo, d.Zmat);
  if (d.Zmat.cols() > 0 &&
      (combo * d.Uobs - d.Zmat).cwiseAbs().maxCoeff() > 1e-9)
    throw Error("build_mode_obs: combination identity for Zmat not solvable");

  d.Uimp = solve_min_norm(-d.Oimp.transpose(), d.Zimp);
  if (d.Zimp.cols() > 0 &&
      (-d.Oimp.transpose() * d.Uimp - d.Zimp).cwiseAbs().maxCoeff() > 1e-9)
    throw Error("build_mode_obs: impulse readout identity not solvable");

  return d;
}

namespace {

// Observer-form Ackermann for a single-output observable pair.
Matrix ackermann_gain(const Matrix& S, const Matrix& Rrow,
                      const std::vector<double>& poles) {
  const Index r = S.rows();
  Matrix obs(r, r);
  Matrix spow = Matrix::Identity(r, r);
  for (Index i = 0; i < r; ++i) {
    obs.row(i) = Rrow * spow;
    spow = spow * S;
  }
  Matrix phi = Matrix::Identity(r, r);
  for (double p : poles) phi = phi * (S - p * Matrix::Identity(r, r));
  Vector e_last = Vector::Zero(r);
  e_last(r - 1) = 1.0;
  Eigen::FullPivLU<Matrix> lu(obs);
  if (!lu.isInvertible())
    throw Error("design_gain: reduced pair is not single-output observable");
  return phi * lu.solve(Matrix(e_last));
}

bool pair_observable(const Matrix& S, const Matrix& R) {
  const Index r = S.rows();
  if (r == 0) return true;
  Matrix obs(R.rows() * r, r);
  Matrix spow = Matrix::Identity(r, r);
  for (Index i = 0; i < r; ++i) {
    obs.middleRows(i * R.rows(), R.rows()) = R * spow;
    spow = spow * S;
  }
  return Subspace::column_space(obs.transpose()).dim() == r;
}

// Pole placement through a Sylvester equation X S - F X = G R, L = X^{-1} G.
Matrix sylvester_gain(const Matrix& S, const Matrix& R,
                      std::vector<double> poles, std::mt19937_64& rng) {
  const Index r = S.rows();
  const Index y = R.rows();
  // Distinct diagonal F, nudged away from eigenvalues of S.
  std::sort(poles.begin(), poles.end());
  for (std::size_t i = 1; i < poles.size(); ++i)
    if (poles[i] - poles[i - 1] < 1e-6)
      poles[i] = poles[i - 1] + 1e-3 * (1.0 + std::abs(poles[i - 1]));
  Matrix F = Matrix::Zero(r, r);
  for (Index i = 0; i < r; ++i) F(i, i) = poles[i];

  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int attempt = 0; attempt < 32; ++attempt) {
    Matrix G(r, y);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < y; ++j) G(i, j) = dist(rng);
    // Kronecker solve of (S^T (x) I - I (x) F) vec(X) = vec(G R).
    Matrix lhs = Matrix::Zero(r * r, r * r);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < r; ++j)
        for (Index k = 0; k < r; ++k) {
          lhs(i + r * j, i + r * k) += S(k, j);  // X S term
          lhs(k + r * j, i + r * j) -= F(k, i);  // -F X term
        }
    const Matrix rhs_mat = G * R;
    Vector rhs(r * r);
    for (Index j = 0; j < r; ++j)
      for (Index i = 0; i < r; ++i) rhs(i + r * j) = rhs_mat(i, j);
    Eigen::FullPivLU<Matrix> lu(lhs);
    if (!lu.isInvertible()) continue;
    const Vector xv = lu.solve(rhs);
    Matrix X(r, r);
    for (Index j = 0; j < r; ++j)
      for (Index i = 0; i < r; ++i) X(i, j) = xv(i + r * j);
    Eigen::FullPivLU<Matrix> xlu(X);
    if (!xlu.isInvertible() || detail::cond_number(X) > 1e10) continue;
    return xlu.solve(G);
  }
  throw Error("design_gain: pole placement failed for the multi-output pair");
}

void check_poles(const Matrix& S, const Matrix& L, const Matrix& R,
                 std::vector<double> poles) {
  Eigen::EigenSolver<Matrix> es(S - L * R);
  std::vector<double> got(poles.size());
  for (std::size_t i = 0; i < poles.size(); ++i) {
    const std::complex<double> ev = es.eigenvalues()(static_cast<Index>(i));
    if (ev.real() >= 0.0)
      throw Error("design_gain: closed-loop estimator is not Hurwitz");
    got[i] = ev.real();
  }
  std::sort(got.begin(), got.end());
  std::sort(poles.begin(), poles.end());
  for (std::size_t i = 0; i < poles.size(); ++i)
    if (std::abs(got[i] - poles[i]) > 1e-6 * std::max(1.0, std::abs(poles[i])))
      throw Error("design_gain: assigned poles deviate from the request");
}

double contraction_bound(const ModeObsData& d, double tau) {
  if (d.r_diff() == 0) return 0.0;
  return spectral_norm(expm(Matrix(d.Sdiff - d.L * d.Rdiff), tau)) *
         spectral_norm(expm(d.Sdiff, -tau));
}

}  // namespace

void design_gain(ModeObsData& data, const std::vector<double>& poles, double tau) {
  const Index r = data.r_diff();
  require(tau > 0.0, "design_gain: interval length must be positive");
  if (r == 0) {
    data.L = Matrix::Zero(0, data.ydim);
    data.gain_eps = 0.0;
    data.gain_tau = tau;
    return;
  }
  require(static_cast<Index>(poles.size()) == r,
          "design_gain: one pole per reduced state required");
  for (double p : poles)
    require(p < 0.0, "design_gain: poles must lie in the open left half-plane");

  if (data.ydim == 1) {
    data.L = ackermann_gain(data.Sdiff, data.Rdiff, poles);
  } else {
    // Cyclic combination: collapse the outputs through a random functional and
    // place single-output style; fall back to a Sylvester design when the pair
    // is derogatory and no combination is observable.
    std::mt19937_64 rng(0xc0b1aed5ULL);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix L;
    bool done = false;
    for (int attempt = 0; attempt < 8 && !done; ++attempt) {
      Vector wvec(data.ydim);
      for (Index i = 0; i < data.ydim; ++i) wvec(i) = dist(rng);
      wvec.normalize();
      const Matrix Rc = wvec.transpose() * data.Rdiff;
      if (!pair_observable(data.Sdiff, Rc)) continue;
      L = ackermann_gain(data.Sdiff, Rc, poles) * wvec.transpose();
      done = true;
    }
    if (!done) L = sylvester_gain(data.Sdiff, data.Rdiff, poles, rng);
    data.L = L;
  }
  check_poles(data.Sdiff, data.L, data.Rdiff, poles);
  data.gain_tau = tau;
  data.gain_eps = contraction_bound(data, tau);
}

void design_gain_for_eps(ModeObsData& data, double target_eps, double tau) {
  require(target_eps > 0.0, "design_gain_for_eps: target accuracy must be positive");
  require(tau > 0.0, "design_gain_for_eps: interval length must be positive");
  const Index r = data.r_diff();
  if (r == 0) {
    data.L = Matrix::Zero(0, data.ydim);
    data.gain_eps = 0.0;
    data.gain_tau = tau;
    return;
  }
  double scale = 1.0;
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<double> poles(r);
    for (Index i = 0; i < r; ++i)
      poles[i] = -scale * (1.0 + 0.25 * static_cast<double>(i)) / tau;
    design_gain(data, poles, tau);
    if (data.gain_eps <= target_eps) return;
    scale *= 2.0;
  }
  throw BudgetError("design_gain_for_eps: could not certify eps = " +
                    std::to_string(target_eps));
}

Vector estimate_zdiff(const ModeObsData& data, const PwsTrajectory& ye, double t_k,
                      double tau, double grid_step) {
  if (data.r_diff() == 0) return Vector(0);
  require(data.gain_designed() && data.L.size() > 0,
          "estimate_zdiff: gain not designed");
  require(tau > 0.0 && grid_step > 0.0, "estimate_zdiff: bad interval or step");
  const int steps = static_cast<int>(std::ceil(tau / grid_step));
  if (steps < 20)
    throw InvalidArgumentError(
        "estimate_zdiff: grid too coarse (fewer than 20 samples)");
  const double h = tau / steps;
  const double t_end = t_k + tau;

  auto ye_at = [&](double t) -> Vector {
    if (t <= t_k || time_eq(t, t_k)) return ye.eval_right(t_k);
    if (t >= t_end || time_eq(t, t_end)) return ye.eval_left(t_end);
    return ye.eval_right(t);
  };

  const Matrix Acl = data.Sdiff - data.L * data.Rdiff;
  Vector z = Vector::Zero(data.r_diff());
  auto rhs = [&](const Vector& zz, double t) -> Vector {
    return Acl * zz + data.L * ye_at(t);
  };
  // Substep when the closed-loop dynamics are stiff relative to the grid;
  // the recorded mismatch can be evaluated at arbitrary times.
  const int substeps =
      std::max(1, static_cast<int>(std::ceil(spectral_norm(Acl) * h)));
  const double hs = h / substeps;
  for (int i = 0; i < steps; ++i) {
    for (int s = 0; s < substeps; ++s) {
      const double t = t_k + i * h + s * hs;
      const Vector k1 = rhs(z, t);
      const Vector k2 = rhs(z + 0.5 * hs * k1, t + 0.5 * hs);
      const Vector k3 = rhs(z + 0.5 * hs * k2, t + 0.5 * hs);
      const Vector k4 = rhs(z + hs * k3, t + hs);
      z = z + (hs / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
  }
  return expm(data.Sdiff, -tau) * z;
}

Vector extract_zimp(const ModeObsData& data, const ImpulseRecord& eta,
                    NoiseModel* noise) {
  if (data.r_imp() == 0) return Vector(0);
  if (eta.dim != data.ydim)
    throw DimensionError("extract_zimp: impulse record dimension mismatch");
  if (static_cast<Index>(eta.coeffs.size()) > data.n - 1)
    throw DimensionError("extract_zimp: impulse record has too many orders");
  ImpulseRecord rec = eta;
  if (noise != nullptr) noise->perturb(rec);
  return data.Uimp.transpose() * rec.stacked(data.n - 1);
}

Vector compose_zhat(const ModeObsData& data, const Vector& zdiff,
                    const Vector& zimp) {
  require(zdiff.size() == data.r_diff(), "compose_zhat: zdiff size mismatch");
  require(zimp.size() == data.r_imp(), "compose_zhat: zimp size mismatch");
  return data.Uobs.transpose() * detail::vcat(zdiff, zimp);
}

Vector ideal_z(const ModeObsData& data, const Vector& e_minus) {
  require(e_minus.size() == data.n, "ideal_z: state dimension mismatch");
  return data.Zmat.transpose() * e_minus;
}

}  // namespace sdae
