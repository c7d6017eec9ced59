// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exits nonzero if any fails.

#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "sdae/observer.hpp"
#include "sdae/scenario.hpp"
#include "sdae/simulator.hpp"
#include "sdae/windowing.hpp"
#include "test_support.hpp"

namespace {

using namespace sdae;
using sdae::testing::example1_system;
using sdae::testing::example2_system;
using sdae::testing::obs_per_interval;
using sdae::testing::random_mode;
using sdae::testing::random_vector;

struct Criterion {
  int number;
  std::string title;
  std::function<void(std::ostringstream&)> body;  // throws on failure
};

#define ACCEPT_CHECK(cond, msg)                                     \
  do {                                                              \
    if (!(cond)) throw std::runtime_error(std::string(": ") + msg); \
  } while (0)

// 1. Golden matrices of the impulse-observed DAE mode.
void criterion1(std::ostringstream& detail) {
  const SwitchedSystem sys = example2_system(1);
  const Mode& mode = sys.pool()[1];
  const auto& dec = mode.decomposition();
  Matrix pi_expected = Matrix::Zero(4, 4);
  pi_expected(2, 2) = pi_expected(3, 3) = 1.0;
  Matrix adiff_expected = Matrix::Zero(4, 4);
  adiff_expected(3, 2) = 1.0;
  adiff_expected(3, 3) = -1.0;
  const double pi_err = (dec.Pi - pi_expected).cwiseAbs().maxCoeff();
  const double ad_err = (dec.Adiff - adiff_expected).cwiseAbs().maxCoeff();
  const ModeObsData obs = build_mode_obs(mode);
  Matrix oimp_expected = Matrix::Zero(3, 4);
  oimp_expected(0, 0) = 1.0;
  const double oi_err = (obs.Oimp - oimp_expected).cwiseAbs().maxCoeff();
  detail << "max entry errors: Pi " << pi_err << ", Adiff " << ad_err
         << ", Oimp " << oi_err;
  ACCEPT_CHECK(pi_err < 1e-10, "Pi deviates");
  ACCEPT_CHECK(ad_err < 1e-10, "Adiff deviates");
  ACCEPT_CHECK(oi_err < 1e-10, "Oimp deviates");
}

// 2. Error-propagation identity of the three-state error flow.
void criterion2(std::ostringstream& detail) {
  const SwitchedSystem sys = example1_system(1);
  std::mt19937_64 rng(42);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vector e0(3);
    e0 << 0.0, 2.0 * random_vector(rng, 1)(0), 2.0 * random_vector(rng, 1)(0);
    const SimResult res = solve_homogeneous(sys, e0, 0.0, 3.0);
    const double expected =
        std::exp(-1.0) * e0(2) + (1.0 - std::exp(-1.0)) * e0(1);
    worst = std::max(worst, std::abs(res.x.eval_left(3.0)(2) - expected));
  }
  detail << "worst deviation " << worst;
  ACCEPT_CHECK(worst < 1e-9, "identity violated");
}

// 3. Detectability certificate over ten periods with uniformity constants.
void criterion3(std::ostringstream& detail) {
  const SwitchedSystem sys = example1_system(10);
  const auto obs = obs_per_interval(sys);
  const double alpha_star = std::exp(-1.0);
  std::vector<WindowData> windows;
  double worst_alpha_dev = 0.0, worst_mconst = 0.0;
  for (int i = 0; i < 10; ++i) {
    windows.push_back(build_window(sys, obs, WindowSpec{3 * i, 3 * i + 3}));
    worst_alpha_dev =
        std::max(worst_alpha_dev, std::abs(windows.back().alpha - alpha_star));
    worst_mconst = std::max(worst_mconst, windows.back().Mconst);
  }
  detail << "max |alpha - 1/e| = " << worst_alpha_dev << ", max Mconst = "
         << worst_mconst;
  ACCEPT_CHECK(worst_alpha_dev < 1e-9, "alpha deviates from 1/e");
  ACCEPT_CHECK(worst_mconst <= std::exp(2.0) + 1e-6, "Mconst exceeds e^2");
  ACCEPT_CHECK(uniformity_check(windows, alpha_star + 1e-9, std::exp(2.0) + 1e-6),
               "uniformity check failed");
}

// 4. Impulse readout at t = 3 from a state with x1(0^-) = 0.
void criterion4(std::ostringstream& detail) {
  const SwitchedSystem sys = example2_system(2);
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Vector x0 = random_vector(rng, 4);
    x0(0) = 0.0;
    const SimResult res = solve_homogeneous(sys, x0, 0.0, sys.horizon());
    const ImpulseRecord rec = res.y.impulse_at(3.0);
    ACCEPT_CHECK(!rec.empty(), "no output impulse at t = 3");
    worst = std::max(worst, std::abs(rec.coeffs[0](0) + x0(2)));
  }
  detail << "worst |eta0 + x3(0)| = " << worst;
  ACCEPT_CHECK(worst < 1e-9, "impulse coefficient deviates");
}

// 5. Ideal-correction property suite on 200 randomized detectable systems.
// Three system families keep the coverage honest: dense outputs (mostly
// determinable windows), degraded outputs (nontrivial unobservable chains)
// and decoupled-tail systems (an unobservable direction that survives the
// whole window, exercising genuine contraction instead of exact recovery).
void criterion5(std::ostringstream& detail) {
  std::mt19937_64 rng(5);
  int accepted = 0, attempts = 0;
  int nontrivial_chain = 0, surviving_error = 0;
  while (accepted < 200 && attempts < 4000) {
    ++attempts;
    const Index n = 2 + attempts % 4;              // n <= 5
    const Index y = 1 + attempts % 2;
    const int m = 2 + attempts % 3;                // <= 4 modes per window
    const int family = attempts % 3;
    std::vector<Mode> pool;
    std::vector<CycleEntry> cycle;
    for (int k = 0; k < m; ++k)
      cycle.push_back({k, 0.4 + 0.2 * ((attempts + k) % 3)});
    if (family == 2 && n >= 3) {
      pool = sdae::testing::survivor_pool(rng, n, y, m);
    } else {
      for (int k = 0; k < m; ++k) {
        const bool dae = n >= 3 && (attempts + k) % 2 == 0;  // mix ODE / index-2
        if (family == 0)
          pool.push_back(random_mode(rng, n, y, dae, true));
        else
          pool.push_back(sdae::testing::partially_blind_mode(
              rng, n, y, dae, (attempts + 2 * k) % 3));
      }
    }
    SwitchedSystem sys = SwitchedSystem::periodic(pool, cycle, 1);
    WindowData wd;
    try {
      wd = build_window(sys, obs_per_interval(sys),
                        WindowSpec{0, sys.interval_count()});
    } catch (const Error&) {
      continue;  // skip near-singular random draws
    }
    if (wd.alpha >= 0.99) continue;
    Vector e0 = random_vector(rng, n);
    if (e0.norm() < 1e-3) e0 = Vector::Ones(n);
    const SimResult res = solve_homogeneous(sys, e0, 0.0, sys.horizon());
    std::vector<Vector> zhats;
    for (int k = 0; k < wd.length(); ++k) {
      const Vector e_minus = k == 0 ? e0 : res.x.eval_left(sys.boundary(k));
      zhats.push_back(ideal_z(*wd.modes[k], e_minus));
    }
    const Vector xi_left = correction_left(wd, zhats);
    const Vector xi = wd.transition() * xi_left;
    const Vector e_end = res.x.eval_left(sys.horizon());
    const double corrected = (e_end - xi).norm();
    ACCEPT_CHECK(corrected < e0.norm(), "strict error decrease violated");
    ACCEPT_CHECK(corrected <= wd.alpha * e0.norm() + 1e-9 * e0.norm(),
                 "corrected error exceeds the certificate bound");
    for (Index c = 0; c < wd.N[0].dim(); ++c)
      ACCEPT_CHECK(std::abs(xi_left.dot(wd.N[0].basis().col(c))) <
                       1e-10 * std::max(1.0, xi_left.norm()),
                   "xi_left not orthogonal to the unobservable chain");
    if (wd.N[0].dim() > 0) ++nontrivial_chain;
    if (corrected > 1e-6 * e0.norm()) ++surviving_error;
    ++accepted;
  }
  detail << accepted << " detectable instances (" << nontrivial_chain
         << " with nontrivial chains, " << surviving_error
         << " with surviving error), " << attempts << " draws";
  ACCEPT_CHECK(accepted == 200, "could not assemble 200 detectable instances");
  ACCEPT_CHECK(nontrivial_chain >= 40, "chain coverage too thin");
  ACCEPT_CHECK(surviving_error >= 30, "contraction coverage too thin");
}

// 6. End-to-end reproduction of the three-state experiment.
void criterion6(std::ostringstream& detail) {
  const SwitchedSystem sys = example1_system(10);
  Vector x0(3), xhat0(3);
  x0 << 0.5, -0.25, 1.0;
  xhat0 << 1.5, 0.75, -1.0;
  const SimResult plant = solve_homogeneous(sys, x0, 0.0, sys.horizon());
  ObserverConfig cfg;
  for (int i = 0; i < 10; ++i) cfg.windows.push_back({3 * i, 3 * i + 3});
  cfg.alpha_hat = 0.7;
  cfg.gain.type = GainPolicy::Type::Poles;
  cfg.gain.poles = {-50.0};
  cfg.xhat0 = xhat0;
  const ObserverRun run = run_observer(sys, plant.y, cfg, nullptr, &plant.x, &x0);
  double worst_ratio = 0.0;
  for (const auto& log : run.window_logs)
    worst_ratio = std::max(worst_ratio, log.err_end / log.err_start);
  const double initial = (xhat0 - x0).norm();
  const double final_err = run.window_logs.back().err_end;
  detail << "worst window ratio " << worst_ratio << ", final/initial "
         << final_err / initial;
  ACCEPT_CHECK(worst_ratio <= 0.7, "per-window contraction above 0.7");
  ACCEPT_CHECK(final_err < 1e-3 * initial, "final error too large");
}

// 7. End-to-end impulse experiment with seeded multiplicative noise.
void criterion7(std::ostringstream& detail) {
  const SwitchedSystem sys = example2_system(15);
  Vector x0(4), xhat0(4);
  x0 << 0.0, 0.5, 1.0, -0.5;
  xhat0 << 1.0, 1.5, 2.0, 0.5;
  const SimResult plant = solve_homogeneous(sys, x0, 0.0, sys.horizon());
  ObserverConfig cfg;
  for (int i = 0; i < 15; ++i) cfg.windows.push_back({2 * i, 2 * i + 2});
  cfg.alpha_hat = 0.9;
  cfg.gain.type = GainPolicy::Type::Poles;
  cfg.gain.poles = {-50.0};
  cfg.noise.type = NoiseSpec::Type::Multiplicative;
  cfg.noise.eps = 0.1;
  cfg.noise.seed = 2025;
  cfg.xhat0 = xhat0;
  const ObserverRun run = run_observer(sys, plant.y, cfg, nullptr, &plant.x, &x0);
  double worst_ratio = 0.0;
  for (const auto& log : run.window_logs)
    worst_ratio = std::max(worst_ratio, log.err_end / log.err_start);
  // Component-wise decay below 1% of the initial error entries.
  const Vector e0 = xhat0 - x0;
  const Vector e_end =
      (run.xhat->eval_left(sys.horizon()) - run.corrections.back().xi) -
      plant.x.eval_left(sys.horizon());
  double worst_component = 0.0;
  for (Index i = 0; i < 4; ++i)
    worst_component = std::max(worst_component,
                               std::abs(e_end(i)) / std::abs(e0(i)));
  detail << "worst window ratio " << worst_ratio << ", worst component ratio "
         << worst_component;
  ACCEPT_CHECK(worst_ratio <= 0.9, "per-window contraction above 0.9");
  ACCEPT_CHECK(worst_component < 0.01, "component error above 1% of initial");
}

// 8. Oracle equivalence of the closed-form solver and fixed-step RK4.
void criterion8(std::ostringstream& detail) {
  double worst = 0.0;
  for (int which = 0; which < 2; ++which) {
    const SwitchedSystem sys =
        which == 0 ? example1_system(4) : example2_system(5);
    std::mt19937_64 rng(80 + which);
    const Vector x0 = random_vector(rng, sys.n());
    const SimResult exact = solve_homogeneous(sys, x0, 0.0, 10.0);
    const SimResult oracle = brute_force_oracle(sys, x0, 0.0, 10.0, 1e-3);
    for (double t = 0.0; t < 10.0; t += 1e-2) {
      worst = std::max(
          worst, (oracle.x.eval_right(t) - exact.x.eval_right(t)).norm());
    }
  }
  detail << "max state deviation " << worst;
  ACCEPT_CHECK(worst < 1e-6, "oracle deviates from the closed-form solver");
}

// 9. Delay compensation leaves the corrections unchanged.
void criterion9(std::ostringstream& detail) {
  const SwitchedSystem sys = example1_system(10);
  Vector x0(3), xhat0(3);
  x0 << 0.5, -0.25, 1.0;
  xhat0 << 1.5, 0.75, -1.0;
  const SimResult plant = solve_homogeneous(sys, x0, 0.0, sys.horizon());
  ObserverConfig cfg;
  for (int i = 0; i < 10; ++i) cfg.windows.push_back({3 * i, 3 * i + 3});
  cfg.alpha_hat = 0.7;
  cfg.gain.type = GainPolicy::Type::Poles;
  cfg.gain.poles = {-50.0};
  cfg.xhat0 = xhat0;
  const ObserverRun undelayed =
      run_observer(sys, plant.y, cfg, nullptr, &plant.x, &x0);
  ObserverConfig dcfg = cfg;
  dcfg.delay = 0.5;
  const ObserverRun delayed =
      run_observer_delayed(sys, plant.y, dcfg, nullptr, &plant.x, &x0);
  double worst = 0.0;
  for (std::size_t i = 0; i < undelayed.corrections.size(); ++i)
    worst = std::max(worst, (undelayed.corrections[i].xi -
                             delayed.corrections[i].xi)
                                .norm());
  detail << "max correction deviation " << worst;
  ACCEPT_CHECK(worst < 1e-9, "delayed corrections deviate");
}

// 10. Randomized property suites of the decomposition and simulation layer.
void criterion10(std::ostringstream& detail) {
  std::mt19937_64 rng(10);
  int projector_checks = 0, wong_checks = 0, jump_checks = 0, impulse_checks = 0;
  // Projector identities and Wong direct sums on random regular pairs.
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n1 = 1 + trial % 3;
    const Index n2 = trial % 3;
    const MatrixPair pair =
        sdae::testing::random_regular_pair(rng, n1, n2);
    const PairDecomposition dec = decompose(pair);
    const double scale = std::max(1.0, dec.Pi.norm() + dec.Adiff.norm() +
                                           dec.Eimp.norm());
    ACCEPT_CHECK((dec.Pi * dec.Pi - dec.Pi).cwiseAbs().maxCoeff() < 1e-7 * scale,
                 "projector not idempotent");
    ACCEPT_CHECK((dec.Adiff * dec.Pi - dec.Adiff).cwiseAbs().maxCoeff() <
                     1e-7 * scale,
                 "Adiff Pi identity violated");
    ACCEPT_CHECK((dec.Pi * dec.Eimp).cwiseAbs().maxCoeff() < 1e-7 * scale,
                 "Pi Eimp identity violated");
    ++projector_checks;
    const auto [v, w] = wong_limits(pair);
    ACCEPT_CHECK(v.dim() + w.dim() == pair.n(), "Wong dimensions do not add up");
    ACCEPT_CHECK(v.sum(w).dim() == pair.n(), "Wong limits not complementary");
    ++wong_checks;
  }
  // Jump rule and impulse relation along simulated switched systems.
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 3 + trial % 2;
    std::vector<Mode> pool{random_mode(rng, n, 1, false, true),
                           random_mode(rng, n, 1, true, true)};
    const SwitchedSystem sys =
        SwitchedSystem::periodic(pool, {{0, 0.5}, {1, 0.5}}, 1);
    const Vector e0 = random_vector(rng, n);
    SimResult res = solve_homogeneous(sys, e0, 0.0, sys.horizon());
    const double t1 = sys.boundary(1);
    const Vector left = res.x.eval_left(t1);
    const Vector right = res.x.eval_right(t1);
    const auto& dec = sys.mode(1).decomposition();
    ACCEPT_CHECK((right - dec.Pi * left).norm() <
                     1e-10 * std::max(1.0, left.norm()),
                 "jump rule violated");
    ++jump_checks;
    const ModeObsData obs = build_mode_obs(sys.mode(1));
    const Vector eta_expected = -obs.Oimp * left;
    const ImpulseRecord rec = res.y.impulse_at(t1);
    ACCEPT_CHECK((rec.stacked(n - 1) - eta_expected).norm() <
                     1e-9 * std::max(1.0, eta_expected.norm()),
                 "impulse relation eta = -Oimp e(t^-) violated");
    ++impulse_checks;
  }
  detail << projector_checks << " projector, " << wong_checks << " Wong, "
         << jump_checks << " jump, " << impulse_checks << " impulse instances";
  ACCEPT_CHECK(projector_checks == 1000 && wong_checks == 1000 &&
                   jump_checks == 1000 && impulse_checks == 1000,
               "instance counts below 1000");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "golden decomposition matrices of the impulse-observed mode", criterion1},
      {2, "error-propagation identity on [0,3)", criterion2},
      {3, "detectability certificate alpha = 1/e with uniformity", criterion3},
      {4, "output impulse readout at t = 3", criterion4},
      {5, "ideal-correction decrease + orthogonality on 200 random systems",
       criterion5},
      {6, "end-to-end three-state observer contraction", criterion6},
      {7, "end-to-end impulse observer with 10% measurement noise", criterion7},
      {8, "closed-form solver vs fixed-step RK4 oracle", criterion8},
      {9, "delay compensation with Delta = 0.5", criterion9},
      {10, "randomized projector/Wong/jump/impulse property suites", criterion10},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    std::ostringstream detail;
    try {
      c.body(detail);
      std::cout << "PASS criterion " << c.number << ": " << c.title << " ("
                << detail.str() << ")\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL criterion " << c.number << ": " << c.title << e.what()
                << (detail.str().empty() ? "" : " (" + detail.str() + ")")
                << "\n";
    }
  }
  if (failures > 0)
    std::cout << failures << " of " << criteria.size() << " criteria failed\n";
  else
    std::cout << "all " << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
