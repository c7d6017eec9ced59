#include "sdae/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "sdae/matrix_pair.hpp"

namespace sdae {

void ImpulseRecord::trim(double tol) {
  while (!coeffs.empty() && coeffs.back().norm() <= tol) coeffs.pop_back();
}

Vector ImpulseRecord::stacked(Index order_count) const {
  Vector out = Vector::Zero(order_count * dim);
  const Index used = std::min<Index>(order_count, static_cast<Index>(coeffs.size()));
  for (Index j = 0; j < used; ++j) out.segment(j * dim, dim) = coeffs[j];
  return out;
}

bool ImpulseRecord::approx_equal(const ImpulseRecord& other, double tol) const {
  if (dim != other.dim) return false;
  const Index orders =
      static_cast<Index>(std::max(coeffs.size(), other.coeffs.size()));
  if (orders == 0) return true;
  return (stacked(orders) - other.stacked(orders)).cwiseAbs().maxCoeff() <= tol;
}

Segment Segment::closed_form(double begin, double end, std::vector<FlowTerm> terms) {
  require(begin < end, "Segment: empty or inverted interval");
  require(!terms.empty(), "Segment: closed form needs at least one term");
  Segment s;
  s.begin_ = begin;
  s.end_ = end;
  s.dim_ = terms.front().output_map.rows();
  for (const auto& t : terms) {
    require(t.output_map.rows() == s.dim_, "Segment: term dimensions differ");
    require(t.output_map.cols() == t.generator.rows() &&
                t.generator.rows() == t.generator.cols() &&
                t.anchor_value.size() == t.generator.cols(),
            "Segment: inconsistent flow term shapes");
  }
  s.eval_ = ClosedForm{std::move(terms)};
  return s;
}

Segment Segment::sampled(double begin, double end, std::vector<double> times,
                         Matrix values) {
  require(begin < end, "Segment: empty or inverted interval");
  require(times.size() >= 2, "Segment: sampled grid needs at least two points");
  require(static_cast<Index>(times.size()) == values.cols(),
          "Segment: grid/value count mismatch");
  require(times.front() <= begin + 1e-12 && times.back() >= end - 1e-12,
          "Segment: grid does not cover the interval");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], "Segment: grid not strictly increasing");
  Segment s;
  s.begin_ = begin;
  s.end_ = end;
  s.dim_ = values.rows();
  s.eval_ = Sampled{std::move(times), std::move(values)};
  return s;
}

namespace {

// Cubic Hermite interpolation with finite-difference slopes.
void hermite_bracket(const std::vector<double>& ts, double t, std::size_t& i) {
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
  if (i >= ts.size() - 1) i = ts.size() - 2;
}

Vector slope_at(const Matrix& vals, const std::vector<double>& ts, std::size_t i) {
  const std::size_t last = ts.size() - 1;
  if (i == 0) return (vals.col(1) - vals.col(0)) / (ts[1] - ts[0]);
  if (i == last)
    return (vals.col(last) - vals.col(last - 1)) / (ts[last] - ts[last - 1]);
  return (vals.col(i + 1) - vals.col(i - 1)) / (ts[i + 1] - ts[i - 1]);
}

}  // namespace

Vector Segment::value(double t) const {
  require(t >= begin_ - 1e-9 * std::max(1.0, std::abs(begin_)) &&
              t <= end_ + 1e-9 * std::max(1.0, std::abs(end_)),
          "Segment: evaluation outside the closed interval");
  if (const auto* cf = std::get_if<ClosedForm>(&eval_)) {
    Vector out = Vector::Zero(dim_);
    for (const auto& term : cf->terms)
      out += term.output_map *
             (expm(term.generator, t - term.anchor_time) * term.anchor_value);
    return out;
  }
  const auto& sp = std::get<Sampled>(eval_);
  std::size_t i = 0;
  hermite_bracket(sp.times, t, i);
  const double h = sp.times[i + 1] - sp.times[i];
  const double s = (t - sp.times[i]) / h;
  const Vector p0 = sp.values.col(i), p1 = sp.values.col(i + 1);
  const Vector m0 = slope_at(sp.values, sp.times, i) * h;
  const Vector m1 = slope_at(sp.values, sp.times, i + 1) * h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 +
         (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
}

Vector Segment::derivative(double t, int order) const {
  require(order >= 0, "Segment: negative derivative order");
  if (order == 0) return value(t);
  if (const auto* cf = std::get_if<ClosedForm>(&eval_)) {
    Vector out = Vector::Zero(dim_);
    for (const auto& term : cf->terms) {
      Matrix gen_pow = Matrix::Identity(term.generator.rows(), term.generator.cols());
      for (int k = 0; k < order; ++k) gen_pow = gen_pow * term.generator;
      out += term.output_map * gen_pow *
             (expm(term.generator, t - term.anchor_time) * term.anchor_value);
    }
    return out;
  }
  require(order <= 3, "Segment: sampled segments support derivatives up to order 3");
  const auto& sp = std::get<Sampled>(eval_);
  std::size_t i = 0;
  hermite_bracket(sp.times, t, i);
  const double h = sp.times[i + 1] - sp.times[i];
  const double s = (t - sp.times[i]) / h;
  const Vector p0 = sp.values.col(i), p1 = sp.values.col(i + 1);
  const Vector m0 = slope_at(sp.values, sp.times, i) * h;
  const Vector m1 = slope_at(sp.values, sp.times, i + 1) * h;
  const double s2 = s * s;
  Vector d;
  if (order == 1) {
    d = (6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * m0 +
        (-6 * s2 + 6 * s) * p1 + (3 * s2 - 2 * s) * m1;
  } else if (order == 2) {
    d = (12 * s - 6) * p0 + (6 * s - 4) * m0 + (-12 * s + 6) * p1 + (6 * s - 2) * m1;
  } else {
    d = 12 * p0 + 6 * m0 - 12 * p1 + 6 * m1;
  }
  return d / std::pow(h, order);
}

Segment Segment::with_bounds(double begin, double end) const {
  require(begin < end, "Segment: empty or inverted interval");
  Segment s = *this;
  s.begin_ = begin;
  s.end_ = end;
  return s;
}

PwsTrajectory::PwsTrajectory(Index dim, std::vector<Segment> segments,
                             std::vector<ImpulseRecord> impulses)
    : dim_(dim), segments_(std::move(segments)), impulses_(std::move(impulses)) {
  require(!segments_.empty(), "PwsTrajectory: needs at least one segment");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    require(segments_[i].dim() == dim_, "PwsTrajectory: segment dimension mismatch");
    if (i > 0)
      require(time_eq(segments_[i - 1].end(), segments_[i].begin()),
              "PwsTrajectory: segments not contiguous");
  }
  for (std::size_t i = 0; i < impulses_.size(); ++i) {
    require(impulses_[i].dim == dim_, "PwsTrajectory: impulse dimension mismatch");
    if (i > 0)
      require(impulses_[i - 1].time < impulses_[i].time,
              "PwsTrajectory: impulses not strictly ordered");
    bool at_boundary = false;
    for (const auto& s : segments_)
      if (time_eq(s.begin(), impulses_[i].time)) at_boundary = true;
    require(at_boundary, "PwsTrajectory: impulse not at a segment boundary");
  }
}

namespace {

std::size_t segment_for_left(const std::vector<Segment>& segs, double t) {
  for (std::size_t i = segs.size(); i-- > 0;) {
    if (t > segs[i].begin() && t <= segs[i].end()) return i;
    if (time_eq(t, segs[i].end())) return i;
  }
  throw InvalidArgumentError("eval_left: time outside trajectory domain");
}

std::size_t segment_for_right(const std::vector<Segment>& segs, double t) {
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (time_eq(t, segs[i].begin())) return i;
    if (t >= segs[i].begin() && t < segs[i].end()) return i;
  }
  throw InvalidArgumentError("eval_right: time outside trajectory domain");
}

}  // namespace

Vector PwsTrajectory::eval_left(double t) const {
  const std::size_t i = segment_for_left(segments_, t);
  return segments_[i].value(t);
}

Vector PwsTrajectory::eval_right(double t) const {
  const std::size_t i = segment_for_right(segments_, t);
  return segments_[i].value(t);
}

ImpulseRecord PwsTrajectory::impulse_at(double t) const {
  for (const auto& rec : impulses_)
    if (time_eq(rec.time, t)) return rec;
  return ImpulseRecord::empty_at(t, dim_);
}

PwsTrajectory PwsTrajectory::restrict(double a, double b) const {
  require(a < b, "restrict: empty or inverted interval");
  require(a >= domain_begin() - 1e-9 && b <= domain_end() + 1e-9,
          "restrict: interval outside trajectory domain");
  std::vector<Segment> segs;
  for (const auto& s : segments_) {
    const double lo = std::max(a, s.begin());
    const double hi = std::min(b, s.end());
    if (lo < hi && !time_eq(lo, hi)) segs.push_back(s.with_bounds(lo, hi));
  }
  std::vector<ImpulseRecord> imps;
  for (const auto& rec : impulses_) {
    const bool in = (rec.time >= a || time_eq(rec.time, a)) && rec.time < b &&
                    !time_eq(rec.time, b);
    if (in) imps.push_back(rec);
  }
  return PwsTrajectory(dim_, std::move(segs), std::move(imps));
}

const std::vector<FlowTerm>* Segment::flow_terms() const {
  if (const auto* cf = std::get_if<ClosedForm>(&eval_)) return &cf->terms;
  return nullptr;
}

PwsTrajectory PwsTrajectory::subtract(const PwsTrajectory& other) const {
  require(dim_ == other.dim_, "subtract: dimension mismatch");
  require(segments_.size() == other.segments_.size() &&
              time_eq(domain_begin(), other.domain_begin()) &&
              time_eq(domain_end(), other.domain_end()),
          "subtract: segmentations do not match");
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& sa = segments_[i];
    const Segment& sb = other.segments_[i];
    require(time_eq(sa.begin(), sb.begin()) && time_eq(sa.end(), sb.end()),
            "subtract: segment boundaries do not match");
    const auto* ta = sa.flow_terms();
    const auto* tb = sb.flow_terms();
    if (ta && tb) {
      // The difference of two flow sums is again a flow sum; no sampling error.
      std::vector<FlowTerm> terms = *ta;
      for (FlowTerm term : *tb) {
        term.output_map = -term.output_map;
        terms.push_back(std::move(term));
      }
      segs.push_back(Segment::closed_form(sa.begin(), sa.end(), std::move(terms)));
    } else {
      const int samples = 256;
      std::vector<double> ts(samples + 1);
      Matrix vals(dim_, samples + 1);
      for (int j = 0; j <= samples; ++j) {
        const double t = sa.begin() + (sa.end() - sa.begin()) * j / samples;
        ts[j] = t;
        vals.col(j) = sa.value(t) - sb.value(t);
      }
      segs.push_back(
          Segment::sampled(sa.begin(), sa.end(), std::move(ts), std::move(vals)));
    }
  }
  // Impulse mismatch: subtract coefficient-wise with zero-padding.
  std::vector<ImpulseRecord> imps;
  std::size_t ia = 0, ib = 0;
  while (ia < impulses_.size() || ib < other.impulses_.size()) {
    const bool have_a = ia < impulses_.size();
    const bool have_b = ib < other.impulses_.size();
    double ta_time = have_a ? impulses_[ia].time : 0.0;
    double tb_time = have_b ? other.impulses_[ib].time : 0.0;
    ImpulseRecord rec;
    if (have_a && have_b && time_eq(ta_time, tb_time)) {
      const auto& ra = impulses_[ia++];
      const auto& rb = other.impulses_[ib++];
      const Index orders =
          static_cast<Index>(std::max(ra.coeffs.size(), rb.coeffs.size()));
      rec = ImpulseRecord::empty_at(ra.time, dim_);
      const Vector diff = ra.stacked(orders) - rb.stacked(orders);
      for (Index j = 0; j < orders; ++j)
        rec.coeffs.push_back(diff.segment(j * dim_, dim_));
    } else if (have_a && (!have_b || ta_time < tb_time)) {
      rec = impulses_[ia++];
    } else {
      rec = other.impulses_[ib++];
      for (auto& c : rec.coeffs) c = -c;
    }
    rec.trim();
    if (!rec.empty()) imps.push_back(std::move(rec));
  }
  return PwsTrajectory(dim_, std::move(segs), std::move(imps));
}

TrajectoryEventStream::TrajectoryEventStream(const PwsTrajectory& traj)
    : traj_(&traj) {}

std::optional<SignalEvent> TrajectoryEventStream::next() {
  const auto& segs = traj_->segments();
  const auto& imps = traj_->impulses();
  const bool have_seg = seg_idx_ < segs.size();
  const bool have_imp = imp_idx_ < imps.size();
  if (!have_seg && !have_imp) return std::nullopt;
  // Impulses fire at segment starts; emit the impulse first.
  if (have_imp &&
      (!have_seg || imps[imp_idx_].time <= segs[seg_idx_].begin() ||
       time_eq(imps[imp_idx_].time, segs[seg_idx_].begin()))) {
    SignalEvent ev{SignalEvent::Kind::Impulse, nullptr, &imps[imp_idx_],
                   imps[imp_idx_].time};
    ++imp_idx_;
    return ev;
  }
  SignalEvent ev{SignalEvent::Kind::Segment, &segs[seg_idx_], nullptr,
                 segs[seg_idx_].begin()};
  ++seg_idx_;
  return ev;
}

}  // namespace sdae
