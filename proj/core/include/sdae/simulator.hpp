#pragma once

#include "sdae/switched_system.hpp"
#include "sdae/trajectory.hpp"

namespace sdae {

/// State and output trajectories of one simulation run.
struct SimResult {
  PwsTrajectory x;
  PwsTrajectory y;
};

/// Exact distributional solution of the homogeneous switched DAE on [a, b)
/// from the left-sided initial value x(a^-) = x0:
///   - jump x(t_k^+) = Pi_k x(t_k^-) at every switching time (and at a),
///   - flow x(t) = exp(Adiff_k (t - t_k)) x(t_k^+) between switches,
///   - state impulse coefficients -(Eimp_k)^{j+1} x(t_k^-),
///   - output impulse coefficients -C_k (Eimp_k)^{j+1} x(t_k^-).
/// Segments are stored in closed form; there is no discretization error.
SimResult solve_homogeneous(const SwitchedSystem& sys, const Vector& x0, double a,
                            double b);

/// Solution with a (non-impulsive) input signal. The differential part is
/// integrated with an adaptive Runge-Kutta scheme on the consistency space;
/// the algebraic part is reconstructed from the input and its derivatives.
/// The DAE residual is checked on the sample grid and a failure throws.
SimResult solve_with_input(const SwitchedSystem& sys, const Vector& x0,
                           const PwsTrajectory& u, double a, double b,
                           double grid_step);

/// Independent verification path: integrates each mode in quasi-Weierstrass
/// coordinates with fixed-step RK4 on the differential block, enforcing the
/// algebraic block exactly (homogeneous case), and applies jumps via Pi.
SimResult brute_force_oracle(const SwitchedSystem& sys, const Vector& x0, double a,
                             double b, double step);

}  // namespace sdae
