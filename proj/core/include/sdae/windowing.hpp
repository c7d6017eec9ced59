#pragma once

#include <memory>
#include <vector>

#include "sdae/mode_observability.hpp"
#include "sdae/subspace.hpp"
#include "sdae/switched_system.hpp"

namespace sdae {

/// A detectability window [t_p, t_q) by interval indices, p < q.
struct WindowSpec {
  int p = 0;
  int q = 0;
};

/// Detectability certificate of a window: `alpha` is the contraction of the
/// zero-output-constrained solutions over the window, `Mconst` the sampled
/// intermediate overshoot. The test alpha < 1 is sufficient for
/// interval-detectability.
struct Certificate {
  double alpha = 0.0;
  double Mconst = 0.0;
  bool detectable = false;
};

/// All interval-level objects of one window: the backward unobservable-space
/// chain, the orthonormal decomposition matrices of each stage, the backward
/// combination maps, the forward transition and the error-budget constant.
struct WindowData {
  int p = 0;
  int q = 0;
  std::vector<double> durations;                          // tau_k, k = p..q-1
  std::vector<std::shared_ptr<const ModeObsData>> modes;  // k = p..q-1

  std::vector<Subspace> N;   // N_k^q, k = p..q-1
  std::vector<Matrix> M;     // orthonormal, im = (N_k^q)-perp; M[q-1-p] = Z_{q-1}
  std::vector<Matrix> Theta; // k = p..q-2
  std::vector<Matrix> U;     // M_k = [Z_k, Pi_k^T Theta_k] U_k,  k = p..q-2
  std::vector<Matrix> F;     // mu_k = F_k (z_k / mu_{k+1}),      k = p..q-2
  std::vector<Matrix> Phi;   // Phi_p^k, k = p..q (size q-p+1)
  Matrix Omap;               // xi_left = Omap * (z_p / ... / z_{q-1})

  double alpha = 0.0;
  double Mconst = 0.0;
  double c = 0.0;            // norm product entering the error budget

  int length() const { return q - p; }
  Index state_dim() const { return modes.front()->n; }
  Index z_dim(int k) const { return modes.at(k - p)->r(); }
  const Matrix& transition() const { return Phi.back(); }
};

/// Backward recursion of the window-unobservable subspaces:
/// N_{q-1} = W_{q-1},  N_k = W_k  intersect  Pi_k^{-1} e^{-Adiff_k tau_k} N_{k+1}.
std::vector<Subspace> unobs_chain(
    const std::vector<std::shared_ptr<const ModeObsData>>& modes,
    const std::vector<double>& durations);

/// Builds all window matrices, the composed map, the transition and the
/// certificate quantities.
WindowData build_window(std::vector<std::shared_ptr<const ModeObsData>> modes,
                        std::vector<double> durations, int p);

/// Convenience overload taking the window from the switching structure.
WindowData build_window(const SwitchedSystem& sys,
                        const std::vector<std::shared_ptr<const ModeObsData>>&
                            obs_per_interval,
                        const WindowSpec& w);

Certificate detect_certificate(const WindowData& wd);

/// Uniformity over a family of windows: sup alpha_i <= alpha_star and
/// sup Mconst_i <= M_star.
bool uniformity_check(const std::vector<WindowData>& windows, double alpha_star,
                      double M_star);

/// Error-budget constants: c is the stored norm product and
/// eps_max = (alpha_hat - alpha) / c. Requires alpha < alpha_hat < 1.
struct ErrorBudget {
  double c = 0.0;
  double eps_max = 0.0;
};
ErrorBudget error_budget(const WindowData& wd, double alpha_hat);

/// Backward combination of the per-mode estimates: evaluates the mu recursion
/// from mu_{q-1} = zhat_{q-1} and returns xi_left = M_p mu_p, an element of
/// (N_p^q)-perp.
Vector correction_left(const WindowData& wd, const std::vector<Vector>& zhats);

/// Forward-propagated correction xi = Phi_p^q xi_left.
Vector correction(const WindowData& wd, const std::vector<Vector>& zhats);

}  // namespace sdae
