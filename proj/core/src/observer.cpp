#include "sdae/observer.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "linalg_util.hpp"

namespace sdae {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-interval observability data with gains for a specific duration.
std::shared_ptr<const ModeObsData> with_gain(const ModeObsData& base,
                                             const GainPolicy& policy,
                                             double eps_target, double tau) {
  auto data = std::make_shared<ModeObsData>(base);
  switch (policy.type) {
    case GainPolicy::Type::Poles: {
      require(!policy.poles.empty() || data->r_diff() == 0,
              "observer: gain policy provides no poles");
      // Resize the list to the mode's reduced order, spreading extra entries
      // so the assignment stays well posed.
      std::vector<double> poles(static_cast<std::size_t>(data->r_diff()));
      for (std::size_t i = 0; i < poles.size(); ++i) {
        if (i < policy.poles.size()) {
          poles[i] = policy.poles[i];
        } else {
          const double extra = static_cast<double>(i - policy.poles.size() + 1);
          poles[i] = policy.poles.back() * (1.0 + 0.25 * extra);
        }
      }
      design_gain(*data, poles, tau);
      break;
    }
    case GainPolicy::Type::TargetEps:
      design_gain_for_eps(*data, policy.target_eps, tau);
      break;
    case GainPolicy::Type::Budget: {
      require(std::isfinite(eps_target) && eps_target > 0.0,
              "observer: budget gain policy needs a finite positive eps_max");
      design_gain_for_eps(*data, eps_target * policy.budget_safety, tau);
      break;
    }
  }
  return data;
}

double grid_step_for(const ObserverConfig& cfg, double tau) {
  return cfg.grid_step > 0.0 ? cfg.grid_step : tau / 200.0;
}

}  // namespace

ObserverRun run_observer_delayed(const SwitchedSystem& sys, const PwsTrajectory& y,
                                 const ObserverConfig& cfg, const PwsTrajectory* u,
                                 const PwsTrajectory* x_truth,
                                 const Vector* x0_truth) {
  require(!cfg.windows.empty(), "observer: no windows configured");
  require(cfg.xhat0.size() == sys.n(), "observer: xhat0 dimension mismatch");
  require(cfg.delay >= 0.0, "observer: negative delay");
  for (std::size_t i = 0; i < cfg.windows.size(); ++i) {
    const auto& w = cfg.windows[i];
    require(w.p >= 0 && w.p < w.q && w.q <= sys.interval_count(),
            "observer: window indices outside the horizon");
    if (i > 0)
      require(cfg.windows[i - 1].q == w.p,
              "observer: windows must partition the horizon contiguously");
    const double len = sys.boundary(w.q) - sys.boundary(w.p);
    require(cfg.delay < len, "observer: delay must be shorter than every window");
  }

  ObserverRun run;
  NoiseModel noise = cfg.noise.type == NoiseSpec::Type::Multiplicative
                         ? NoiseModel::multiplicative(cfg.noise.eps, cfg.noise.seed)
                         : NoiseModel::off();

  // Mode-level observability data, shared across intervals using the same
  // pool entry (Algorithm initialization phase).
  std::vector<std::shared_ptr<const ModeObsData>> pool_obs(sys.pool().size());
  for (std::size_t i = 0; i < sys.pool().size(); ++i)
    pool_obs[i] = std::make_shared<const ModeObsData>(
        build_mode_obs(sys.pool()[i]));

  std::vector<Segment> xhat_segs;
  std::vector<ImpulseRecord> xhat_imps;
  Vector xhat_minus = cfg.xhat0;

  for (std::size_t wi = 0; wi < cfg.windows.size(); ++wi) {
    const WindowSpec& w = cfg.windows[wi];
    const double t_p = sys.boundary(w.p);
    const double t_q = sys.boundary(w.q);
    const double t_data_end = t_q - cfg.delay;

    // Full-window chain for the forward transition and the certificate.
    std::vector<std::shared_ptr<const ModeObsData>> full_modes;
    std::vector<double> full_durations;
    for (int k = w.p; k < w.q; ++k) {
      full_modes.push_back(pool_obs[sys.mode_index(k)]);
      full_durations.push_back(sys.duration(k));
    }
    WindowData full = build_window(full_modes, full_durations, w.p);
    if (!detect_certificate(full).detectable)
      throw CertificateError("observer: window [" + std::to_string(w.p) + "," +
                             std::to_string(w.q) + ") is not detectable (alpha = " +
                             std::to_string(full.alpha) + ")");

    // Data window: possibly truncated by the processing delay.
    WindowData data = full;
    if (cfg.delay > 0.0) {
      std::vector<std::shared_ptr<const ModeObsData>> dmodes;
      std::vector<double> ddur;
      for (int k = w.p; k < w.q && sys.boundary(k) < t_data_end &&
                        !time_eq(sys.boundary(k), t_data_end);
           ++k) {
        dmodes.push_back(pool_obs[sys.mode_index(k)]);
        ddur.push_back(std::min(sys.boundary(k + 1), t_data_end) - sys.boundary(k));
      }
      data = build_window(dmodes, ddur, w.p);
      if (!detect_certificate(data).detectable)
        throw CertificateError(
            "observer: delay-truncated window starting at interval " +
            std::to_string(w.p) + " is not detectable");
    }

    // Error budget and gains for the data window.
    double eps_max = kInf;
    if (cfg.alpha_hat > data.alpha && cfg.alpha_hat < 1.0)
      eps_max = error_budget(data, cfg.alpha_hat).eps_max;
    else if (cfg.gain.type == GainPolicy::Type::Budget)
      throw BudgetError("observer: alpha_hat is not above the window alpha; no "
                        "budget can be derived");
    else
      run.warnings.push_back(
          "window " + std::to_string(wi) +
          ": alpha_hat does not dominate alpha; the contraction bound is "
          "not certified");

    for (std::size_t k = 0; k < data.modes.size(); ++k) {
      auto designed = with_gain(*data.modes[k], cfg.gain,
                                eps_max == kInf ? 1e-6 : eps_max,
                                data.durations[k]);
      double eps_k = designed->gain_eps;
      if (designed->r_imp() > 0 && noise.active())
        eps_k = std::max(eps_k, cfg.noise.eps);
      if (eps_k > eps_max) {
        std::ostringstream oss;
        oss << "window " << wi << ", interval " << (w.p + static_cast<int>(k))
            << ": estimation accuracy " << eps_k << " exceeds the budget "
            << eps_max;
        if (cfg.enforce_budget) throw BudgetError(oss.str());
        run.warnings.push_back(oss.str());
      }
      data.modes[k] = std::move(designed);
    }

    // System copy over the full window.
    const double sim_step = cfg.grid_step > 0.0 ? cfg.grid_step : 5e-3;
    SimResult copy = u == nullptr
                         ? solve_homogeneous(sys, xhat_minus, t_p, t_q)
                         : solve_with_input(sys, xhat_minus, *u, t_p, t_q, sim_step);
    PwsTrajectory ye = copy.y.restrict(t_p, t_q).subtract(y.restrict(t_p, t_q));

    // Local estimates on the data window.
    std::vector<Vector> zhats(data.modes.size());
    for (std::size_t k = 0; k < data.modes.size(); ++k) {
      const auto& md = *data.modes[k];
      const double t_k = sys.boundary(w.p + static_cast<int>(k));
      const double tau = data.durations[k];
      const Vector zdiff =
          estimate_zdiff(md, ye, t_k, tau, grid_step_for(cfg, tau));
      ImpulseRecord eta = ye.impulse_at(t_k);
      const Vector zimp = extract_zimp(md, eta, &noise);
      zhats[k] = compose_zhat(md, zdiff, zimp);
    }

    const Vector xi_left = correction_left(data, zhats);
    const Vector xi = full.transition() * xi_left;
    const Vector xhat_q_minus = copy.x.eval_left(t_q);
    const Vector corrected = xhat_q_minus - xi;

    run.corrections.push_back({t_q, xi, xi_left});
    run.zhat_log.push_back(std::move(zhats));

    WindowLog log;
    log.p = w.p;
    log.q = w.q;
    log.t_p = t_p;
    log.t_q = t_q;
    log.alpha = full.alpha;
    log.eps_max = eps_max;
    if (x_truth != nullptr) {
      if (wi == 0 && x0_truth != nullptr)
        log.err_start = (xhat_minus - *x0_truth).norm();
      else if (t_p > x_truth->domain_begin() && !time_eq(t_p, x_truth->domain_begin()))
        log.err_start = (xhat_minus - x_truth->eval_left(t_p)).norm();
      const Vector x_q = x_truth->eval_left(t_q);
      log.err_end = (corrected - x_q).norm();
      double peak = 0.0;
      constexpr int kPeakSamples = 200;
      for (int s = 0; s < kPeakSamples; ++s) {
        const double t = t_p + (t_q - t_p) * s / kPeakSamples;
        peak = std::max(peak,
                        (copy.x.eval_right(t) - x_truth->eval_right(t)).norm());
      }
      log.intra_peak = peak;
    }
    run.window_logs.push_back(log);

    for (const auto& seg : copy.x.segments()) xhat_segs.push_back(seg);
    for (const auto& imp : copy.x.impulses()) xhat_imps.push_back(imp);
    xhat_minus = corrected;
  }

  run.xhat = PwsTrajectory(sys.n(), std::move(xhat_segs), std::move(xhat_imps));
  return run;
}

ObserverRun run_observer(const SwitchedSystem& sys, const PwsTrajectory& y,
                         const ObserverConfig& cfg, const PwsTrajectory* u,
                         const PwsTrajectory* x_truth, const Vector* x0_truth) {
  require(cfg.delay == 0.0,
          "run_observer: use run_observer_delayed for positive delays");
  return run_observer_delayed(sys, y, cfg, u, x_truth, x0_truth);
}

}  // namespace sdae
