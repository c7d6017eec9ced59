#include "sdae/csv.hpp"

#include <cstdio>
#include <ostream>

namespace sdae {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const PwsTrajectory& traj,
                          const std::string& name, double grid_step) {
  os << "t";
  for (Index i = 1; i <= traj.dim(); ++i) os << "," << name << "_" << i;
  os << "\n";
  const double a = traj.domain_begin();
  const double b = traj.domain_end();
  const auto emit = [&](double t, const Vector& v) {
    os << format_g17(t);
    for (Index i = 0; i < v.size(); ++i) os << "," << format_g17(v(i));
    os << "\n";
  };
  for (long i = 0;; ++i) {
    const double t = a + static_cast<double>(i) * grid_step;
    if (t >= b || time_eq(t, b)) break;
    emit(t, traj.eval_right(t));
  }
  emit(b, traj.eval_left(b));
}

void write_impulse_csv(std::ostream& os, const PwsTrajectory& traj) {
  os << "t,order,component,coeff\n";
  for (const auto& rec : traj.impulses()) {
    for (std::size_t j = 0; j < rec.coeffs.size(); ++j) {
      for (Index i = 0; i < rec.coeffs[j].size(); ++i) {
        os << format_g17(rec.time) << "," << j << "," << (i + 1) << ","
           << format_g17(rec.coeffs[j](i)) << "\n";
      }
    }
  }
}

void write_correction_csv(std::ostream& os,
                          const std::vector<CorrectionEvent>& corrections) {
  os << "t,xi_norm,xi_left_norm\n";
  for (const auto& c : corrections)
    os << format_g17(c.t) << "," << format_g17(c.xi.norm()) << ","
       << format_g17(c.xi_left.norm()) << "\n";
}

void write_error_csv(std::ostream& os, const std::vector<WindowLog>& logs) {
  os << "t,error,intra_window_peak\n";
  for (const auto& log : logs)
    os << format_g17(log.t_q) << "," << format_g17(log.err_end) << ","
       << format_g17(log.intra_peak) << "\n";
}

}  // namespace sdae
