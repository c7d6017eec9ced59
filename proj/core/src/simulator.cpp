#include "sdae/simulator.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <vector>

#include "linalg_util.hpp"

namespace sdae {

namespace {

struct Piece {
  int interval;  // interval index in the system
  double begin;
  double end;
};

// Splits [a, b) along the system's switching grid.
std::vector<Piece> split_window(const SwitchedSystem& sys, double a, double b) {
  require(a < b && !time_eq(a, b), "simulate: empty window");
  require(a >= -1e-12 && b <= sys.horizon() * (1 + 1e-12) + 1e-12,
          "simulate: window outside the system horizon");
  b = std::min(b, sys.horizon());
  std::vector<Piece> pieces;
  double t = std::max(a, 0.0);
  while (t < b && !time_eq(t, b)) {
    int k = sys.interval_at(t);
    if (time_eq(t, sys.boundary(k + 1))) ++k;  // snapped across a boundary
    const double end = std::min(b, sys.boundary(k + 1));
    pieces.push_back({k, t, end});
    t = end;
  }
  require(!pieces.empty(), "simulate: window splitting failed");
  return pieces;
}

// Impulse records at the start of a piece, from the left-sided state value.
void record_impulses(const PairDecomposition& dec, const Matrix& C, double t,
                     const Vector& x_minus, std::vector<ImpulseRecord>* x_imps,
                     std::vector<ImpulseRecord>* y_imps) {
  const int nu = dec.qwf.nilpotency_index;
  if (nu < 2) return;  // (Eimp)^{j+1} vanishes for all j >= 0
  ImpulseRecord xr = ImpulseRecord::empty_at(t, x_minus.size());
  ImpulseRecord yr = ImpulseRecord::empty_at(t, C.rows());
  Matrix power = dec.Eimp;  // (Eimp)^{j+1}, starting at j = 0
  for (int j = 0; j <= nu - 2; ++j) {
    const Vector coeff = -(power * x_minus);
    xr.coeffs.push_back(coeff);
    yr.coeffs.push_back(C * coeff);
    power = power * dec.Eimp;
  }
  const double scale = 1e-14 * std::max(1.0, x_minus.norm());
  xr.trim(scale);
  yr.trim(scale);
  if (!xr.empty()) x_imps->push_back(std::move(xr));
  if (!yr.empty()) y_imps->push_back(std::move(yr));
}

// Evaluates a signal treating the domain end as a left limit.
Vector eval_signal(const PwsTrajectory& s, double t) {
  if (time_eq(t, s.domain_end()) || t >= s.domain_end())
    return s.eval_left(s.domain_end());
  if (t <= s.domain_begin()) return s.eval_right(s.domain_begin());
  return s.eval_right(t);
}

// Prefers the right-sided segment at boundaries (values at t_k^+).
Vector eval_signal_derivative(const PwsTrajectory& s, double t, int order) {
  for (const auto& seg : s.segments()) {
    if ((t >= seg.begin() && t < seg.end()) || time_eq(t, seg.begin()))
      return seg.derivative(std::clamp(t, seg.begin(), seg.end()), order);
  }
  for (const auto& seg : s.segments()) {
    if (time_eq(t, seg.end()))
      return seg.derivative(seg.end(), order);
  }
  throw InvalidArgumentError("signal derivative: time outside domain");
}

}  // namespace

SimResult solve_homogeneous(const SwitchedSystem& sys, const Vector& x0, double a,
                            double b) {
  require(x0.size() == sys.n(), "solve_homogeneous: x0 dimension mismatch");
  require_finite(Matrix(x0), "solve_homogeneous.x0");
  const auto pieces = split_window(sys, a, b);

  std::vector<Segment> x_segs, y_segs;
  std::vector<ImpulseRecord> x_imps, y_imps;
  Vector x_minus = x0;
  for (const auto& piece : pieces) {
    const Mode& mode = sys.mode(piece.interval);
    const auto& dec = mode.decomposition();
    record_impulses(dec, mode.C(), piece.begin, x_minus, &x_imps, &y_imps);
    const Vector x_plus = dec.Pi * x_minus;
    const Index n = sys.n();
    x_segs.push_back(Segment::closed_form(
        piece.begin, piece.end,
        {FlowTerm{Matrix::Identity(n, n), dec.Adiff, x_plus, piece.begin}}));
    y_segs.push_back(Segment::closed_form(
        piece.begin, piece.end,
        {FlowTerm{mode.C(), dec.Adiff, x_plus, piece.begin}}));
    x_minus = expm(dec.Adiff, piece.end - piece.begin) * x_plus;
  }
  return SimResult{PwsTrajectory(sys.n(), std::move(x_segs), std::move(x_imps)),
                   PwsTrajectory(sys.output_dim(), std::move(y_segs),
                                 std::move(y_imps))};
}

SimResult brute_force_oracle(const SwitchedSystem& sys, const Vector& x0, double a,
                             double b, double step) {
  require(step > 0.0, "brute_force_oracle: step must be positive");
  require(x0.size() == sys.n(), "brute_force_oracle: x0 dimension mismatch");
  const auto pieces = split_window(sys, a, b);
  const Index n = sys.n();

  std::vector<Segment> x_segs, y_segs;
  std::vector<ImpulseRecord> x_imps, y_imps;
  Vector x_minus = x0;
  for (const auto& piece : pieces) {
    const Mode& mode = sys.mode(piece.interval);
    const auto& dec = mode.decomposition();
    record_impulses(dec, mode.C(), piece.begin, x_minus, &x_imps, &y_imps);

    const Index n1 = dec.qwf.n1;
    const Matrix& T = dec.qwf.T;
    const Matrix& J = dec.qwf.J;
    Eigen::PartialPivLU<Matrix> tlu(T);
    // A consistent state is (v, 0) in QWF coordinates; the jump via Pi keeps
    // exactly the differential block.
    Vector v = tlu.solve(dec.Pi * x_minus).head(n1);

    const double len = piece.end - piece.begin;
    const int steps = std::max(1, static_cast<int>(std::ceil(len / step)));
    const double h = len / steps;
    auto to_state = [&](const Vector& vv) {
      Vector z = Vector::Zero(n);
      z.head(n1) = vv;
      return Vector(T * z);
    };

    std::vector<double> ts(steps + 1);
    Matrix vals(n, steps + 1);
    ts[0] = piece.begin;
    vals.col(0) = to_state(v);
    for (int i = 0; i < steps; ++i) {
      const Vector k1 = J * v;
      const Vector k2 = J * (v + 0.5 * h * k1);
      const Vector k3 = J * (v + 0.5 * h * k2);
      const Vector k4 = J * (v + h * k3);
      v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
      ts[i + 1] = piece.begin + (i + 1) * h;
      vals.col(i + 1) = to_state(v);
    }
    ts.back() = piece.end;  // guard the final node against accumulation error

    Matrix yvals = mode.C() * vals;
    x_minus = vals.col(steps);
    x_segs.push_back(Segment::sampled(piece.begin, piece.end, ts, std::move(vals)));
    y_segs.push_back(Segment::sampled(piece.begin, piece.end, std::move(ts),
                                      std::move(yvals)));
  }
  return SimResult{PwsTrajectory(n, std::move(x_segs), std::move(x_imps)),
                   PwsTrajectory(sys.output_dim(), std::move(y_segs),
                                 std::move(y_imps))};
}

namespace {

using OdeState = std::vector<double>;

}  // namespace

SimResult solve_with_input(const SwitchedSystem& sys, const Vector& x0,
                           const PwsTrajectory& u, double a, double b,
                           double grid_step) {
  require(grid_step > 0.0, "solve_with_input: grid step must be positive");
  require(x0.size() == sys.n(), "solve_with_input: x0 dimension mismatch");
  require(u.dim() == sys.input_dim(), "solve_with_input: input dimension mismatch");
  for (const auto& rec : u.impulses())
    if (rec.time >= a && rec.time < b)
      throw InvalidArgumentError("solve_with_input: impulsive inputs are rejected");

  const auto pieces = split_window(sys, a, b);
  const Index n = sys.n();

  std::vector<Segment> x_segs, y_segs;
  std::vector<ImpulseRecord> x_imps, y_imps;
  Vector x_minus = x0;
  for (const auto& piece : pieces) {
    const Mode& mode = sys.mode(piece.interval);
    const auto& dec = mode.decomposition();
    record_impulses(dec, mode.C(), piece.begin, x_minus, &x_imps, &y_imps);

    const Index n1 = dec.qwf.n1;
    const Index n2 = n - n1;
    const int nu = dec.qwf.nilpotency_index;
    // Differential input matrix in original coordinates, from the QWF blocks.
    const Matrix Bdiff =
        dec.qwf.T *
        detail::blkdiag(Matrix::Identity(n1, n1), Matrix::Zero(n2, n2)) *
        (dec.qwf.S * mode.B());
    // Algebraic reconstruction x_alg = -sum_i K_i u^(i) with
    // K_0 = T blkdiag(0, I) S B and K_{i+1} = Eimp K_i.
    std::vector<Matrix> K;
    if (n2 > 0) {
      K.push_back(dec.qwf.T *
                  detail::blkdiag(Matrix::Zero(n1, n1), Matrix::Identity(n2, n2)) *
                  (dec.qwf.S * mode.B()));
      for (int i = 1; i < nu; ++i) K.push_back(dec.Eimp * K.back());
    }
    auto x_alg_at = [&](double t) {
      Vector alg = Vector::Zero(n);
      for (std::size_t i = 0; i < K.size(); ++i)
        alg -= K[i] * eval_signal_derivative(u, t, static_cast<int>(i));
      return alg;
    };

    const double len = piece.end - piece.begin;
    const int steps = std::max(2, static_cast<int>(std::ceil(len / grid_step)));
    const double h = len / steps;
    std::vector<double> ts(steps + 1);
    for (int i = 0; i <= steps; ++i) ts[i] = piece.begin + i * h;
    ts.back() = piece.end;

    Vector xd = dec.Pi * x_minus;
    OdeState state(xd.data(), xd.data() + xd.size());
    auto rhs = [&](const OdeState& xs, OdeState& dxdt, double t) {
      Eigen::Map<const Vector> x(xs.data(), static_cast<Index>(xs.size()));
      const Vector d = dec.Adiff * x + Bdiff * eval_signal(u, t);
      dxdt.assign(d.data(), d.data() + d.size());
    };
    namespace ode = boost::numeric::odeint;
    auto stepper =
        ode::make_controlled<ode::runge_kutta_dopri5<OdeState>>(1e-12, 1e-12);

    Matrix xd_vals(n, steps + 1);
    xd_vals.col(0) = xd;
    for (int i = 0; i < steps; ++i) {
      ode::integrate_adaptive(stepper, rhs, state, ts[i], ts[i + 1], h / 8.0);
      xd_vals.col(i + 1) =
          Eigen::Map<const Vector>(state.data(), static_cast<Index>(state.size()));
    }

    Matrix x_vals(n, steps + 1);
    for (int i = 0; i <= steps; ++i) x_vals.col(i) = xd_vals.col(i) + x_alg_at(ts[i]);

    // DAE residual on interior grid nodes, with the analytic derivative of the
    // reconstructed state.
    for (int i = 1; i < steps; ++i) {
      const Vector uv = eval_signal(u, ts[i]);
      Vector xdot = dec.Adiff * xd_vals.col(i) + Bdiff * uv;
      for (std::size_t j = 0; j < K.size(); ++j)
        xdot -= K[j] * eval_signal_derivative(u, ts[i], static_cast<int>(j) + 1);
      const double resid =
          (mode.E() * xdot - mode.A() * x_vals.col(i) - mode.B() * uv).norm();
      if (resid > 1e-6 * std::max(1.0, x_vals.col(i).norm()))
        throw Error("solve_with_input: DAE residual check failed (" +
                    std::to_string(resid) + ")");
    }

    Matrix y_vals = mode.C() * x_vals;
    for (int i = 0; i <= steps; ++i) y_vals.col(i) += mode.D() * eval_signal(u, ts[i]);

    x_minus = x_vals.col(steps);
    x_segs.push_back(Segment::sampled(piece.begin, piece.end, ts, std::move(x_vals)));
    y_segs.push_back(Segment::sampled(piece.begin, piece.end, std::move(ts),
                                      std::move(y_vals)));
  }
  return SimResult{PwsTrajectory(n, std::move(x_segs), std::move(x_imps)),
                   PwsTrajectory(sys.output_dim(), std::move(y_segs),
                                 std::move(y_imps))};
}

}  // namespace sdae
