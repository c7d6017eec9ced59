#include "sdae/windowing.hpp"

#include <cmath>

#include "linalg_util.hpp"

namespace sdae {

using detail::blkdiag;
using detail::hcat;
using detail::solve_min_norm;
using detail::spectral_norm;
using detail::vcat;

std::vector<Subspace> unobs_chain(
    const std::vector<std::shared_ptr<const ModeObsData>>& modes,
    const std::vector<double>& durations) {
  require(!modes.empty() && modes.size() == durations.size(),
          "unobs_chain: mode/duration count mismatch");
  const int m = static_cast<int>(modes.size());
  std::vector<Subspace> N(m, Subspace::zero(modes.front()->n));
  N[m - 1] = modes[m - 1]->W;
  for (int k = m - 2; k >= 0; --k) {
    const auto& md = *modes[k];
    const Matrix back_flow = expm(md.dec->Adiff, -durations[k]);
    const Subspace pulled = N[k + 1]
                                .map_through(back_flow)
                                .preimage(md.dec->Pi, detail::chain_tol(md.dec->Pi));
    N[k] = md.W.intersect(pulled);
  }
  return N;
}

WindowData build_window(std::vector<std::shared_ptr<const ModeObsData>> modes,
                        std::vector<double> durations, int p) {
  require(!modes.empty(), "build_window: empty window");
  require(modes.size() == durations.size(),
          "build_window: mode/duration count mismatch");
  for (double tau : durations)
    require(tau > 0.0, "build_window: durations must be positive");

  WindowData wd;
  wd.p = p;
  wd.q = p + static_cast<int>(modes.size());
  wd.durations = durations;
  wd.modes = std::move(modes);
  const int m = wd.length();
  const Index n = wd.state_dim();

  // Backward stage construction. One column-space decision per stage defines
  // both M_k (its basis) and N_k (its complement): the identity
  // (im Z_k + im Pi^T Theta_k)^perp = W_k  intersect  Pi_k^{-1} D_k
  // holds exactly, so deriving both sides from the same decomposition keeps
  // the recursion self-consistent on marginal rank decisions.
  wd.N.assign(m, Subspace::zero(n));
  wd.M.resize(m);
  wd.Theta.resize(std::max(0, m - 1));
  wd.U.resize(std::max(0, m - 1));
  wd.F.resize(std::max(0, m - 1));
  // M_{q-1} is chosen equal to Z_{q-1} so that mu_{q-1} = z_{q-1} holds in
  // coordinates, not only at subspace level.
  wd.M[m - 1] = wd.modes[m - 1]->Zmat;
  wd.N[m - 1] = wd.modes[m - 1]->W;
  for (int k = m - 2; k >= 0; --k) {
    const auto& md = *wd.modes[k];
    const Matrix back_flow = expm(md.dec->Adiff, -wd.durations[k]);
    const Subspace pulled_space = wd.N[k + 1].map_through(back_flow);
    wd.Theta[k] = pulled_space.complement().basis();
    const Matrix combo = hcat(md.Zmat, md.dec->Pi.transpose() * wd.Theta[k]);
    const Subspace m_space = Subspace::column_space(combo);
    wd.M[k] = m_space.basis();
    wd.N[k] = m_space.complement();
    wd.U[k] = solve_min_norm(combo, wd.M[k]);
    if (wd.M[k].cols() > 0 &&
        (combo * wd.U[k] - wd.M[k]).cwiseAbs().maxCoeff() > 1e-9)
      throw Error("build_window: M_k does not lie in im [Z_k, Pi^T Theta_k]");
    const Matrix coupling = wd.Theta[k].transpose() * back_flow * wd.M[k + 1];
    wd.F[k] = wd.U[k].transpose() *
              blkdiag(Matrix::Identity(md.r(), md.r()), coupling);
  }

  // Composed map: G_k sends (z_k / ... / z_{q-1}) to mu_k.
  Matrix G = Matrix::Identity(wd.modes[m - 1]->r(), wd.modes[m - 1]->r());
  for (int k = m - 2; k >= 0; --k) {
    const Index zk = wd.modes[k]->r();
    G = wd.F[k] * blkdiag(Matrix::Identity(zk, zk), G);
  }
  wd.Omap = wd.M[0] * G;

  wd.Phi.resize(m + 1);
  wd.Phi[0] = Matrix::Identity(n, n);
  for (int k = 0; k < m; ++k) {
    const auto& md = *wd.modes[k];
    wd.Phi[k + 1] =
        expm(md.dec->Adiff, wd.durations[k]) * md.dec->Pi * wd.Phi[k];
  }

  wd.alpha = spectral_norm(wd.Phi[m] * wd.N[0].basis());

  // Sampled overshoot of the zero-output-constrained flow within the window.
  double mconst = 0.0;
  constexpr int kSamplesPerMode = 50;
  for (int k = 0; k < m; ++k) {
    const auto& md = *wd.modes[k];
    const Matrix base = md.dec->Pi * wd.Phi[k] * wd.N[0].basis();
    for (int s = 0; s <= kSamplesPerMode; ++s) {
      const double local = wd.durations[k] * s / kSamplesPerMode;
      mconst = std::max(mconst,
                        spectral_norm(expm(md.dec->Adiff, local) * base));
    }
  }
  wd.Mconst = std::max(mconst, wd.alpha);

  const Index total_z = [&] {
    Index t = 0;
    for (const auto& md : wd.modes) t += md->r();
    return t;
  }();
  Matrix z_stack(total_z, n);
  Index row = 0;
  for (int k = 0; k < m; ++k) {
    const auto& md = *wd.modes[k];
    z_stack.middleRows(row, md.r()) = md.Zmat.transpose() * wd.Phi[k];
    row += md.r();
  }
  wd.c = spectral_norm(wd.Phi[m] * wd.Omap) * spectral_norm(z_stack);

  return wd;
}

WindowData build_window(const SwitchedSystem& sys,
                        const std::vector<std::shared_ptr<const ModeObsData>>&
                            obs_per_interval,
                        const WindowSpec& w) {
  require(w.p >= 0 && w.q > w.p && w.q <= sys.interval_count(),
          "build_window: window indices outside the horizon");
  require(static_cast<int>(obs_per_interval.size()) == sys.interval_count(),
          "build_window: one ModeObsData per interval required");
  std::vector<std::shared_ptr<const ModeObsData>> modes;
  std::vector<double> durations;
  for (int k = w.p; k < w.q; ++k) {
    modes.push_back(obs_per_interval[k]);
    durations.push_back(sys.duration(k));
  }
  return build_window(std::move(modes), std::move(durations), w.p);
}

Certificate detect_certificate(const WindowData& wd) {
  return Certificate{wd.alpha, wd.Mconst, wd.alpha < 1.0};
}

bool uniformity_check(const std::vector<WindowData>& windows, double alpha_star,
                      double M_star) {
  for (const auto& wd : windows)
    if (wd.alpha > alpha_star || wd.Mconst > M_star) return false;
  return !windows.empty();
}

ErrorBudget error_budget(const WindowData& wd, double alpha_hat) {
  require(wd.alpha < 1.0, "error_budget: window is not detectable");
  require(alpha_hat > wd.alpha && alpha_hat < 1.0,
          "error_budget: alpha_hat must lie in (alpha, 1)");
  ErrorBudget b;
  b.c = wd.c;
  b.eps_max = wd.c > 0.0 ? (alpha_hat - wd.alpha) / wd.c
                         : std::numeric_limits<double>::infinity();
  return b;
}

Vector correction_left(const WindowData& wd, const std::vector<Vector>& zhats) {
  const int m = wd.length();
  require(static_cast<int>(zhats.size()) == m,
          "correction_left: one estimate per mode required");
  for (int k = 0; k < m; ++k)
    require(zhats[k].size() == wd.modes[k]->r(),
            "correction_left: estimate size mismatch at mode " +
                std::to_string(wd.p + k));
  Vector mu = zhats[m - 1];
  for (int k = m - 2; k >= 0; --k) mu = wd.F[k] * vcat(zhats[k], mu);
  return wd.M[0] * mu;
}

Vector correction(const WindowData& wd, const std::vector<Vector>& zhats) {
  return wd.transition() * correction_left(wd, zhats);
}

}  // namespace sdae
