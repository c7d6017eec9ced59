#pragma once

#include <memory>
#include <random>

#include "sdae/subspace.hpp"
#include "sdae/switched_system.hpp"
#include "sdae/trajectory.hpp"

namespace sdae {

/// Multiplicative uniform measurement noise on impulse coefficients:
/// each coefficient entry is scaled by (1 + eps * U(-1, 1)). Deterministic
/// for a fixed seed; draws are consumed in coefficient order.
class NoiseModel {
public:
  static NoiseModel off() { return NoiseModel(); }
  static NoiseModel multiplicative(double eps, std::uint64_t seed) {
    NoiseModel m;
    m.active_ = true;
    m.eps_ = eps;
    m.rng_.seed(seed);
    return m;
  }

  bool active() const { return active_; }
  double eps() const { return eps_; }

  void perturb(ImpulseRecord& rec);

private:
  NoiseModel() = default;
  bool active_ = false;
  double eps_ = 0.0;
  std::mt19937_64 rng_;
};

/// Observability data of one mode: the stacked observability matrices for the
/// smooth and the impulsive output channel, the locally unobservable space,
/// the orthonormal decomposition matrices, the reduced observable system and
/// (once designed) the Luenberger gain with its certified accuracy bound.
struct ModeObsData {
  std::shared_ptr<const PairDecomposition> dec;
  Matrix C;       // output matrix of the mode
  Index n = 0;
  Index ydim = 0;

  Matrix Odiff;   // (n y) x n     stacked Cdiff (Adiff)^i
  Matrix Oimp;    // ((n-1) y) x n stacked C (Eimp)^{i+1}
  Subspace W = Subspace::zero(0);  // locally unobservable space
  Matrix Zmat;    // orthonormal basis of W-perp, n x r
  Matrix Zdiff;   // orthonormal basis of im(Odiff^T)
  Matrix Zimp;    // orthonormal basis of im(Oimp^T)
  Matrix Uobs;    // Zmat = [Pi^T Zdiff, Zimp] Uobs
  Matrix Uimp;    // -Oimp^T Uimp = Zimp (minimum norm)
  Matrix Sdiff;   // reduced flow, r_diff x r_diff
  Matrix Rdiff;   // reduced output, y x r_diff

  Matrix L;       // Luenberger gain, r_diff x y; empty until designed
  double gain_eps = 0.0;  // certified |zhat - z| <= gain_eps |z| bound
  double gain_tau = 0.0;  // interval length the gain was designed for

  Index r() const { return Zmat.cols(); }
  Index r_diff() const { return Zdiff.cols(); }
  Index r_imp() const { return Zimp.cols(); }
  bool gain_designed() const { return r_diff() == 0 || L.size() > 0; }
};

/// Builds all observability data of a mode (gain left undesigned).
ModeObsData build_mode_obs(const Mode& mode);

/// Places the observer poles of (Sdiff, Rdiff): the eigenvalues of
/// Sdiff - L Rdiff match `poles` to 1e-6. Requires poles in the open left
/// half-plane, one per reduced state.
void design_gain(ModeObsData& data, const std::vector<double>& poles, double tau);

/// Pushes poles left geometrically (factor 2) until the end-of-interval
/// contraction bound |e^{(Sdiff - L Rdiff) tau}| |e^{-Sdiff tau}| <= target_eps
/// certifies the requested accuracy.
void design_gain_for_eps(ModeObsData& data, double target_eps, double tau);

/// Runs the Luenberger copy z' = (Sdiff - L Rdiff) z + L y^e from z(t_k^+) = 0
/// with fixed-step RK4 on the segment grid, then back-propagates the final
/// estimate: zhat_diff = e^{-Sdiff tau} zhat(t_{k+1}^-). The grid must have at
/// least 20 samples.
Vector estimate_zdiff(const ModeObsData& data, const PwsTrajectory& ye, double t_k,
                      double tau, double grid_step);

/// Impulsive readout zhat_imp = Uimp^T eta, optionally after applying the
/// measurement-noise model to the record.
Vector extract_zimp(const ModeObsData& data, const ImpulseRecord& eta,
                    NoiseModel* noise = nullptr);

/// Combines the two channels: zhat = Uobs^T (zhat_diff / zhat_imp).
Vector compose_zhat(const ModeObsData& data, const Vector& zdiff,
                    const Vector& zimp);

/// Reference value z = Zmat^T e(t_k^-) for testing the estimators.
Vector ideal_z(const ModeObsData& data, const Vector& e_minus);

}  // namespace sdae
