#pragma once

#include <iosfwd>
#include <string>

#include "sdae/observer.hpp"
#include "sdae/trajectory.hpp"

namespace sdae {

/// Formats a double with 17 significant digits (lossless round trip).
std::string format_g17(double v);

/// Header "t,<name>_1,...,<name>_d"; one row per grid point from the domain
/// start in steps of `grid_step`, right limits, plus a final row at the
/// domain end with the left limit.
void write_trajectory_csv(std::ostream& os, const PwsTrajectory& traj,
                          const std::string& name, double grid_step);

/// Header "t,order,component,coeff"; one row per stored impulse coefficient
/// entry, components 1-based, derivative orders 0-based.
void write_impulse_csv(std::ostream& os, const PwsTrajectory& traj);

/// Header "t,xi_norm,xi_left_norm"; one row per applied correction.
void write_correction_csv(std::ostream& os,
                          const std::vector<CorrectionEvent>& corrections);

/// Header "t,error,intra_window_peak"; one row per window end.
void write_error_csv(std::ostream& os, const std::vector<WindowLog>& logs);

}  // namespace sdae
