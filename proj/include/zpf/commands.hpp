#pragma once

// Experiment commands behind the zpf executable. Each command reads its
// settings from a RunConfig (section = command name, falling back to the
// global block), writes CSV/SVG files plus a manifest into the output
// directory and returns a process exit code.

#include "zpf/config.hpp"
#include "zpf/saddle.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace zpf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitConfig = 3;

struct CommandContext {
  RunConfig config;
  std::string out_dir = "zpf-out";
  unsigned seed = 7;
  int threads = 1;
  bool cache = true;
  std::ostream* log = nullptr;  // progress messages; silent when null
};

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::string> outputs;  // files written, manifest last
  std::vector<std::string> notes;
};

/// Subcommand names in CLI spelling.
const std::vector<std::string>& command_names();

/// Keys accepted in the section of `command` (and in the global block).
const std::vector<std::string>& command_keys(const std::string& command);

/// Validates the config, dispatches and converts exceptions into exit codes
/// (ConfigError -> 3, numerical errors -> 2).
CommandResult run_command(const std::string& command, const CommandContext& ctx);

CommandResult cmd_saddle(const CommandContext& ctx);
CommandResult cmd_coeffs(const CommandContext& ctx);
CommandResult cmd_fluct(const CommandContext& ctx);
CommandResult cmd_sweep_p(const CommandContext& ctx);
CommandResult cmd_sweep_d(const CommandContext& ctx);
CommandResult cmd_gram(const CommandContext& ctx);
CommandResult cmd_ed(const CommandContext& ctx);
CommandResult cmd_crosscheck(const CommandContext& ctx);

/// Runs fn(0..n-1) on up to `threads` workers. The first exception is
/// rethrown after all workers stop.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

/// Reference state used by the commands: D = 1 starts from the Neel product
/// state in the sublattice-rotated frame (blbq is rotated first), larger D
/// from a seeded random tensor. `model` receives the Hamiltonian the state
/// belongs to.
struct PreparedState {
  SpinModel model;
  SaddleReport saddle;
  bool from_cache = false;
};
PreparedState prepare_state(const SpinModel& base, int D, unsigned seed, double tol,
                            int max_iter, const std::string& cache_dir);

}  // namespace zpf
