#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace fwave::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kNumericalFailure = 2,
  kAcceptanceFailure = 3,
};

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::string> route;
  std::optional<std::uint64_t> seed;
};

// Each command writes into `out_dir` (created if needed) and always leaves a
// manifest.json echoing the resolved configuration. Summaries go to `log`.
void cmd_simulate(const ExperimentConfig& cfg, const Overrides& ov,
                  const std::filesystem::path& out_dir, std::ostream& log);
void cmd_spectrum(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                  std::ostream& log);
void cmd_observability(const ExperimentConfig& cfg, const Overrides& ov,
                       const std::filesystem::path& out_dir, std::ostream& log);
void cmd_invert(const ExperimentConfig& cfg, const Overrides& ov,
                const std::filesystem::path& out_dir, std::ostream& log);
/// Returns true when every acceptance criterion passes. Writes
/// acceptance.json when `out_dir` is given.
bool cmd_selftest(const Overrides& ov, const std::optional<std::filesystem::path>& out_dir,
                  std::ostream& log);

/// Full command line: parsing, dispatch and the exit-code contract.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fwave::cli
