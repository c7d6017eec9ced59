#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "sdae/types.hpp"

namespace sdae {

/// Dirac part of a signal at one time instant: coeffs[j] is the coefficient
/// vector of the j-th distributional derivative of the Dirac impulse.
struct ImpulseRecord {
  double time = 0.0;
  Index dim = 0;
  std::vector<Vector> coeffs;

  static ImpulseRecord empty_at(double t, Index dim) { return {t, dim, {}}; }

  bool empty() const { return coeffs.empty(); }

  /// Drops trailing coefficient vectors with norm <= tol.
  void trim(double tol = 0.0);

  /// Stacks the first `order_count` coefficients, zero-padding missing ones.
  Vector stacked(Index order_count) const;

  /// Coefficient-wise comparison after zero-padding to a common order.
  bool approx_equal(const ImpulseRecord& other, double tol = 1e-9) const;
};

/// One smooth term C * exp(A (t - t0)) * v of a closed-form segment.
struct FlowTerm {
  Matrix output_map;
  Matrix generator;
  Vector anchor_value;
  double anchor_time = 0.0;
};

/// A smooth piece of a trajectory on a half-open interval [begin, end).
/// The evaluator is defined on the closed interval so one-sided limits at
/// both ends are available. Closed-form segments are sums of matrix
/// exponential flows; sampled segments interpolate a dense grid cubically.
class Segment {
public:
  static Segment closed_form(double begin, double end, std::vector<FlowTerm> terms);
  static Segment sampled(double begin, double end, std::vector<double> times,
                         Matrix values);

  double begin() const { return begin_; }
  double end() const { return end_; }
  Index dim() const { return dim_; }
  bool is_closed_form() const { return std::holds_alternative<ClosedForm>(eval_); }

  /// Value at t in [begin, end].
  Vector value(double t) const;

  /// Time derivative of the given order at t in [begin, end]. Closed-form
  /// segments support any order; sampled segments up to order 3.
  Vector derivative(double t, int order) const;

  Segment with_bounds(double begin, double end) const;

  /// Flow terms of a closed-form segment, nullptr for sampled segments.
  const std::vector<FlowTerm>* flow_terms() const;

private:
  struct ClosedForm {
    std::vector<FlowTerm> terms;
  };
  struct Sampled {
    std::vector<double> times;
    Matrix values;  // dim x times.size()
  };

  Segment() = default;

  double begin_ = 0.0;
  double end_ = 0.0;
  Index dim_ = 0;
  std::variant<ClosedForm, Sampled> eval_;
};

/// Relative time comparison used to match switching instants.
inline bool time_eq(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

/// A piecewise-smooth distributional signal: contiguous smooth segments over
/// a half-open domain plus Dirac impulse records at segment boundaries.
/// Immutable after construction.
class PwsTrajectory {
public:
  PwsTrajectory(Index dim, std::vector<Segment> segments,
                std::vector<ImpulseRecord> impulses);

  Index dim() const { return dim_; }
  double domain_begin() const { return segments_.front().begin(); }
  double domain_end() const { return segments_.back().end(); }

  /// Left limit of the smooth part; t in (domain_begin, domain_end].
  Vector eval_left(double t) const;

  /// Right limit of the smooth part; t in [domain_begin, domain_end).
  Vector eval_right(double t) const;

  /// Impulse record at t, or the empty record when the signal has none there.
  ImpulseRecord impulse_at(double t) const;

  /// Restriction to [a, b): sub-trajectory keeping impulses with time in [a, b).
  PwsTrajectory restrict(double a, double b) const;

  /// Pointwise difference this - other. Segment boundaries must agree;
  /// impulses are subtracted coefficient-wise after zero-padding.
  PwsTrajectory subtract(const PwsTrajectory& other) const;

  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<ImpulseRecord>& impulses() const { return impulses_; }

private:
  Index dim_;
  std::vector<Segment> segments_;
  std::vector<ImpulseRecord> impulses_;
};

/// Event-based view of a trajectory: impulses and smooth segments interleaved
/// in time order, for consumers that ingest recorded signals incrementally.
struct SignalEvent {
  enum class Kind { Impulse, Segment };
  Kind kind;
  const Segment* segment = nullptr;     // valid for Kind::Segment
  const ImpulseRecord* impulse = nullptr;  // valid for Kind::Impulse
  double time = 0.0;
};

class TrajectoryEventStream {
public:
  explicit TrajectoryEventStream(const PwsTrajectory& traj);
  std::optional<SignalEvent> next();

private:
  const PwsTrajectory* traj_;
  std::size_t seg_idx_ = 0;
  std::size_t imp_idx_ = 0;
};

}  // namespace sdae
