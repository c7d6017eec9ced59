#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sdae/observer.hpp"
#include "sdae/switched_system.hpp"

namespace sdae {

/// One mode entry of a scenario file; B and D default to zero matrices.
struct ScenarioMode {
  Matrix E, A, B, C, D;
  bool operator==(const ScenarioMode&) const = default;
};

struct PeriodicSwitching {
  std::vector<CycleEntry> cycle;
  int repetitions = 1;
  bool operator==(const PeriodicSwitching& o) const;
};

struct ExplicitSwitching {
  std::vector<double> times;  // interior switching times t_1 < t_2 < ...
  std::vector<int> modes;     // one pool index per interval (times.size() + 1)
  double horizon = 0.0;
  bool operator==(const ExplicitSwitching&) const = default;
};

/// A complete experiment description: system, switching, windows, initial
/// values and observer options. Parsed from a JSON document.
struct Scenario {
  std::string name;
  int n = 0;
  int udim = 0;
  int ydim = 0;
  std::vector<ScenarioMode> modes;
  std::variant<PeriodicSwitching, ExplicitSwitching> switching;
  bool periodic_windows = true;               // "windows": "periodic"
  std::vector<WindowSpec> window_list;        // used when periodic_windows is false
  Vector x0;
  Vector xhat0;
  double alpha_hat = 0.95;
  GainPolicy gain;
  NoiseSpec noise;
  double delay = 0.0;
  std::optional<double> grid_step;
  std::optional<std::string> out_dir;

  bool operator==(const Scenario& other) const;
};

struct ParseResult {
  std::optional<Scenario> scenario;
  std::vector<std::string> errors;  // "path: message" per violation
  bool ok() const { return scenario.has_value(); }
};

/// Parses and validates a scenario document. On failure the result carries
/// one entry per violation, each naming the offending field.
ParseResult parse_scenario(const std::string& text);

/// Canonical JSON serialization; parse(serialize(s)) == s.
std::string serialize_scenario(const Scenario& s);

/// Instantiates the switched system described by the scenario. An optional
/// repetition override replaces the periodic repetition count.
SwitchedSystem make_system(const Scenario& s,
                           std::optional<int> repetitions_override = {});

/// The window list: explicit, or one window per switching cycle.
std::vector<WindowSpec> make_windows(const Scenario& s, const SwitchedSystem& sys);

/// Observer configuration assembled from the scenario options. An optional
/// seed override replaces the scenario noise seed.
ObserverConfig make_observer_config(const Scenario& s, const SwitchedSystem& sys,
                                    std::optional<std::uint64_t> seed_override = {});

}  // namespace sdae
