#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace sdae {

/// Command-line level options shared by all subcommands.
struct DispatchOptions {
  std::string out_dir;                       // empty: $SDAE_OUT_DIR or "."
  std::optional<double> grid_step;           // overrides the scenario value
  std::optional<std::uint64_t> seed;         // overrides the scenario noise seed
  std::optional<int> horizon;                // periodic repetition override
};

/// Exit codes of the command-line surface.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;       // unexpected/internal error
inline constexpr int kExitCertificate = 2;   // detectability certificate failed
inline constexpr int kExitSchema = 3;        // scenario schema violation

/// Runs one subcommand (analyze | simulate | detect | observe) on a scenario
/// file, writing reports to `out` and artifacts to the output directory.
/// Returns the process exit code.
int dispatch(const std::string& subcommand, const std::string& scenario_path,
             const DispatchOptions& options, std::ostream& out,
             std::ostream& err);

}  // namespace sdae
