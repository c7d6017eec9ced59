#include "sdae/switched_system.hpp"

#include <cmath>

namespace sdae {

Mode::Mode(Matrix E, Matrix A, Matrix B, Matrix C, Matrix D)
    : E_(std::move(E)),
      A_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)),
      D_(std::move(D)),
      cache_(std::make_shared<Cache>()) {
  const Index n = E_.rows();
  require(n > 0 && E_.cols() == n, "Mode: E must be square and nonempty");
  require(A_.rows() == n && A_.cols() == n, "Mode: A shape mismatch");
  require(B_.rows() == n, "Mode: B row count mismatch");
  require(C_.cols() == n, "Mode: C column count mismatch");
  require(D_.rows() == C_.rows() && D_.cols() == B_.cols(), "Mode: D shape mismatch");
  require_finite(E_, "Mode.E");
  require_finite(A_, "Mode.A");
  require_finite(B_, "Mode.B");
  require_finite(C_, "Mode.C");
  require_finite(D_, "Mode.D");
}

Mode Mode::autonomous(Matrix E, Matrix A, Matrix C) {
  const Index n = E.rows();
  const Index y = C.rows();
  return Mode(std::move(E), std::move(A), Matrix::Zero(n, 0), std::move(C),
              Matrix::Zero(y, 0));
}

const PairDecomposition& Mode::decomposition() const {
  std::call_once(cache_->once, [this] {
    cache_->dec =
        std::make_shared<const PairDecomposition>(decompose(MatrixPair(E_, A_)));
  });
  if (!cache_->dec) throw NotRegularError("Mode: decomposition failed previously");
  return *cache_->dec;
}

SwitchedSystem::SwitchedSystem(std::vector<Mode> pool, std::vector<int> sequence,
                               std::vector<double> boundaries)
    : pool_(std::move(pool)),
      sequence_(std::move(sequence)),
      boundaries_(std::move(boundaries)) {
  require(!pool_.empty(), "SwitchedSystem: empty mode pool");
  require(!sequence_.empty(), "SwitchedSystem: empty mode sequence");
  require(boundaries_.size() == sequence_.size() + 1,
          "SwitchedSystem: boundary count must be interval count + 1");
  require(boundaries_.front() == 0.0, "SwitchedSystem: horizon must start at 0");
  for (std::size_t k = 0; k + 1 < boundaries_.size(); ++k)
    require(boundaries_[k + 1] > boundaries_[k] &&
                !time_eq_system(boundaries_[k], boundaries_[k + 1]),
            "SwitchedSystem: switching times must be strictly increasing");
  const Index n = pool_.front().n();
  const Index u = pool_.front().input_dim();
  const Index y = pool_.front().output_dim();
  for (const auto& m : pool_)
    require(m.n() == n && m.input_dim() == u && m.output_dim() == y,
            "SwitchedSystem: all modes must share state/input/output dimensions");
  for (int idx : sequence_)
    require(idx >= 0 && idx < static_cast<int>(pool_.size()),
            "SwitchedSystem: mode index out of range");
}

bool SwitchedSystem::time_eq_system(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

SwitchedSystem SwitchedSystem::periodic(std::vector<Mode> pool,
                                        std::vector<CycleEntry> cycle,
                                        int repetitions) {
  require(!cycle.empty(), "SwitchedSystem: empty cycle");
  require(repetitions >= 1, "SwitchedSystem: repetitions must be positive");
  for (const auto& e : cycle)
    require(e.duration > 0.0, "SwitchedSystem: cycle durations must be positive");
  std::vector<int> seq;
  std::vector<double> bounds{0.0};
  double period = 0.0;
  for (const auto& e : cycle) period += e.duration;
  for (int r = 0; r < repetitions; ++r) {
    double local = 0.0;
    for (const auto& e : cycle) {
      seq.push_back(e.mode);
      local += e.duration;
      bounds.push_back(r * period + local);
    }
  }
  SwitchedSystem sys(std::move(pool), std::move(seq), std::move(bounds));
  sys.cycle_ = std::move(cycle);
  return sys;
}

int SwitchedSystem::interval_at(double t) const {
  require(t >= 0.0 && t < horizon(), "interval_at: time outside horizon");
  for (int k = interval_count() - 1; k >= 0; --k)
    if (t >= boundaries_[k]) return k;
  return 0;
}

}  // namespace sdae
