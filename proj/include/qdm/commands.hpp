#pragma once

// Batch commands behind the CLI: load a config, run one module, write
// deterministic output files and a manifest next to them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qdm {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitDomain = 2,
  kExitIo = 3,
};

struct CommandRequest {
  /// eval, sweep, simulate, calibrate, plan or trace.
  std::string command;
  std::string config_path;
  std::optional<std::string> out_dir;  // overrides output_dir
  std::optional<std::uint64_t> seed;   // overrides seed
  std::optional<std::size_t> trials;   // overrides trials
  std::optional<std::string> trace_path;
  /// Restricts simulate/plan to one protocol; all three otherwise.
  std::optional<std::string> protocol;
  /// Trace intensity in mW/um2 for calibrate/trace; defaults to the confocal
  /// operating point.
  std::optional<double> intensity;
  /// window or instantaneous.
  std::string criterion = "window";
  bool noiseless = false;
  /// Worker threads; never changes output bytes.
  unsigned workers = 1;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string summary;             // human-readable, for stdout
  std::vector<std::string> files;  // paths written, manifest last
  std::string error;
};

/// Never throws; failures are reported through exit_code and error.
CommandResult run_command(const CommandRequest& request);

std::string_view version() noexcept;

}  // namespace qdm
