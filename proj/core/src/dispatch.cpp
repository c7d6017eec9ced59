#include "sdae/dispatch.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "sdae/csv.hpp"
#include "sdae/mode_observability.hpp"
#include "sdae/scenario.hpp"
#include "sdae/simulator.hpp"
#include "sdae/windowing.hpp"

namespace sdae {

namespace {

namespace fs = std::filesystem;

std::string resolve_out_dir(const DispatchOptions& options,
                            const std::optional<std::string>& scenario_dir) {
  if (!options.out_dir.empty()) return options.out_dir;
  if (scenario_dir) return *scenario_dir;
  if (const char* env = std::getenv("SDAE_OUT_DIR"); env != nullptr && *env != '\0')
    return env;
  return ".";
}

void print_matrix(std::ostream& os, const std::string& label, const Matrix& m) {
  os << label << " (" << m.rows() << "x" << m.cols() << ")\n";
  for (Index r = 0; r < m.rows(); ++r) {
    os << "  [";
    for (Index c = 0; c < m.cols(); ++c) {
      if (c > 0) os << ", ";
      os << format_g17(m(r, c) == 0.0 ? 0.0 : m(r, c));
    }
    os << "]\n";
  }
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open output file " + path.string());
  fn(os);
}

int run_analyze(const Scenario& sc, const SwitchedSystem& sys, std::ostream& out) {
  out << "scenario: " << sc.name << "\n";
  for (std::size_t i = 0; i < sys.pool().size(); ++i) {
    const Mode& mode = sys.pool()[i];
    const auto obs = build_mode_obs(mode);
    out << "\nmode " << i << " (n1 = " << obs.dec->qwf.n1
        << ", nilpotency index = " << obs.dec->qwf.nilpotency_index << ")\n";
    print_matrix(out, "Pi", obs.dec->Pi);
    print_matrix(out, "Adiff", obs.dec->Adiff);
    print_matrix(out, "Eimp", obs.dec->Eimp);
    print_matrix(out, "Odiff", obs.Odiff);
    print_matrix(out, "Oimp", obs.Oimp);
    out << "dim W = " << obs.W.dim() << ", observable dim r = " << obs.r()
        << " (diff " << obs.r_diff() << ", imp " << obs.r_imp() << ")\n";
    for (const auto& w : obs.dec->warnings) out << "warning: " << w << "\n";
  }
  return kExitOk;
}

int run_simulate(const Scenario& sc, const SwitchedSystem& sys,
                 const DispatchOptions& options, const fs::path& dir,
                 std::ostream& out) {
  const SimResult res = solve_homogeneous(sys, sc.x0, 0.0, sys.horizon());
  const double step = options.grid_step.value_or(sc.grid_step.value_or(
      sys.duration(0) / 200.0));
  write_file(dir / "x.csv",
             [&](std::ostream& os) { write_trajectory_csv(os, res.x, "x", step); });
  write_file(dir / "y.csv",
             [&](std::ostream& os) { write_trajectory_csv(os, res.y, "y", step); });
  write_file(dir / "x_impulses.csv",
             [&](std::ostream& os) { write_impulse_csv(os, res.x); });
  write_file(dir / "y_impulses.csv",
             [&](std::ostream& os) { write_impulse_csv(os, res.y); });
  out << "wrote x.csv, y.csv, x_impulses.csv, y_impulses.csv to " << dir.string()
      << "\n";
  return kExitOk;
}

int run_detect(const Scenario& sc, const SwitchedSystem& sys,
               const fs::path& dir, std::ostream& out) {
  std::vector<std::shared_ptr<const ModeObsData>> pool_obs;
  for (const auto& mode : sys.pool())
    pool_obs.push_back(std::make_shared<const ModeObsData>(build_mode_obs(mode)));
  std::vector<std::shared_ptr<const ModeObsData>> per_interval;
  for (int k = 0; k < sys.interval_count(); ++k)
    per_interval.push_back(pool_obs[sys.mode_index(k)]);

  const auto windows = make_windows(sc, sys);
  bool all_detectable = true;
  std::ostringstream rows;
  rows << "window,p,q,t_p,t_q,alpha,mconst,c,eps_max\n";
  out << "window   [t_p, t_q)        alpha        Mconst       c            eps_max\n";
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const WindowData wd = build_window(sys, per_interval, windows[i]);
    const Certificate cert = detect_certificate(wd);
    all_detectable = all_detectable && cert.detectable;
    double eps_max = std::numeric_limits<double>::quiet_NaN();
    if (cert.detectable && sc.alpha_hat > wd.alpha)
      eps_max = error_budget(wd, sc.alpha_hat).eps_max;
    out << std::left << std::setw(8) << i << " [" << std::setw(6) << wd.p << ","
        << std::setw(6) << wd.q << ") " << std::setw(12) << std::setprecision(6)
        << wd.alpha << " " << std::setw(12) << wd.Mconst << " " << std::setw(12)
        << wd.c << " " << std::setw(12) << eps_max
        << (cert.detectable ? "" : "  NOT DETECTABLE") << "\n";
    rows << i << "," << wd.p << "," << wd.q << ","
         << format_g17(sys.boundary(wd.p)) << "," << format_g17(sys.boundary(wd.q))
         << "," << format_g17(wd.alpha) << "," << format_g17(wd.Mconst) << ","
         << format_g17(wd.c) << "," << format_g17(eps_max) << "\n";
  }
  write_file(dir / "detect.csv",
             [&](std::ostream& os) { os << rows.str(); });
  out << (all_detectable ? "all windows detectable"
                         : "certificate FAILED on at least one window")
      << "\n";
  return all_detectable ? kExitOk : kExitCertificate;
}

int run_observe(const Scenario& sc, const SwitchedSystem& sys,
                const DispatchOptions& options, const fs::path& dir,
                std::ostream& out) {
  const SimResult plant = solve_homogeneous(sys, sc.x0, 0.0, sys.horizon());
  ObserverConfig cfg = make_observer_config(sc, sys, options.seed);
  if (options.grid_step) cfg.grid_step = *options.grid_step;
  const Vector x0 = sc.x0;
  const ObserverRun run = run_observer_delayed(sys, plant.y, cfg, nullptr,
                                               &plant.x, &x0);
  const double step = options.grid_step.value_or(sc.grid_step.value_or(
      sys.duration(0) / 200.0));
  write_file(dir / "xhat.csv", [&](std::ostream& os) {
    write_trajectory_csv(os, *run.xhat, "xhat", step);
  });
  write_file(dir / "xhat_impulses.csv",
             [&](std::ostream& os) { write_impulse_csv(os, *run.xhat); });
  write_file(dir / "corrections.csv",
             [&](std::ostream& os) { write_correction_csv(os, run.corrections); });
  write_file(dir / "error.csv",
             [&](std::ostream& os) { write_error_csv(os, run.window_logs); });
  for (const auto& w : run.warnings) out << "warning: " << w << "\n";
  out << "wrote xhat.csv, xhat_impulses.csv, corrections.csv, error.csv to "
      << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int dispatch(const std::string& subcommand, const std::string& scenario_path,
             const DispatchOptions& options, std::ostream& out,
             std::ostream& err) {
  std::ifstream in(scenario_path);
  if (!in) {
    err << "error: cannot read scenario file " << scenario_path << "\n";
    return kExitFailure;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const ParseResult parsed = parse_scenario(buffer.str());
  if (!parsed.ok()) {
    err << "scenario schema violations:\n";
    for (const auto& e : parsed.errors) err << "  " << e << "\n";
    return kExitSchema;
  }
  const Scenario& sc = *parsed.scenario;

  try {
    const SwitchedSystem sys = make_system(sc, options.horizon);
    const fs::path dir = resolve_out_dir(options, sc.out_dir);
    fs::create_directories(dir);
    if (subcommand == "analyze") return run_analyze(sc, sys, out);
    if (subcommand == "simulate") return run_simulate(sc, sys, options, dir, out);
    if (subcommand == "detect") return run_detect(sc, sys, dir, out);
    if (subcommand == "observe") return run_observe(sc, sys, options, dir, out);
    err << "error: unknown subcommand " << subcommand << "\n";
    return kExitFailure;
  } catch (const CertificateError& e) {
    err << "certificate failure: " << e.what() << "\n";
    return kExitCertificate;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace sdae
