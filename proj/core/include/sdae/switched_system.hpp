#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "sdae/matrix_pair.hpp"
#include "sdae/types.hpp"

namespace sdae {

/// One subsystem (E, A, B, C, D). The pair decomposition is computed on first
/// use and cached; copies of a Mode share the cache.
class Mode {
public:
  Mode(Matrix E, Matrix A, Matrix B, Matrix C, Matrix D);

  /// Convenience constructor for autonomous modes (no input).
  static Mode autonomous(Matrix E, Matrix A, Matrix C);

  Index n() const { return E_.rows(); }
  Index input_dim() const { return B_.cols(); }
  Index output_dim() const { return C_.rows(); }

  const Matrix& E() const { return E_; }
  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& C() const { return C_; }
  const Matrix& D() const { return D_; }

  /// Lazily computed decomposition; throws NotRegularError for singular pencils.
  const PairDecomposition& decomposition() const;

private:
  Matrix E_, A_, B_, C_, D_;
  struct Cache {
    std::once_flag once;
    std::shared_ptr<const PairDecomposition> dec;
  };
  std::shared_ptr<Cache> cache_;
};

/// Cycle entry for periodic switching: pool mode index plus duration.
struct CycleEntry {
  int mode = 0;
  double duration = 0.0;
};

/// A switched system over a finite horizon [0, T): a pool of modes, a mode
/// index per switching interval and strictly increasing switching times.
class SwitchedSystem {
public:
  /// Intervals [times[k], times[k+1]) with boundaries 0 = t_0 < t_1 < ... < T.
  /// `sequence[k]` selects the pool mode active on interval k.
  SwitchedSystem(std::vector<Mode> pool, std::vector<int> sequence,
                 std::vector<double> boundaries);

  /// Unrolls `repetitions` copies of the cycle starting at t = 0.
  static SwitchedSystem periodic(std::vector<Mode> pool,
                                 std::vector<CycleEntry> cycle, int repetitions);

  Index n() const { return pool_.front().n(); }
  Index input_dim() const { return pool_.front().input_dim(); }
  Index output_dim() const { return pool_.front().output_dim(); }

  int interval_count() const { return static_cast<int>(sequence_.size()); }
  double horizon() const { return boundaries_.back(); }

  /// Switching-time boundary t_k, k = 0 .. interval_count().
  double boundary(int k) const { return boundaries_.at(k); }
  double duration(int k) const { return boundaries_.at(k + 1) - boundaries_.at(k); }

  const Mode& mode(int k) const { return pool_.at(sequence_.at(k)); }
  int mode_index(int k) const { return sequence_.at(k); }
  const std::vector<Mode>& pool() const { return pool_; }

  /// Index of the interval containing time t in [0, horizon).
  int interval_at(double t) const;

  const std::optional<std::vector<CycleEntry>>& cycle() const { return cycle_; }

private:
  static bool time_eq_system(double a, double b);

  std::vector<Mode> pool_;
  std::vector<int> sequence_;
  std::vector<double> boundaries_;  // size interval_count() + 1, starts at 0
  std::optional<std::vector<CycleEntry>> cycle_;
};

}  // namespace sdae
