#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "fibered/checks.hpp"
#include "fibered/config.hpp"

namespace fibered {

inline constexpr const char* kVersion = "0.1.0";

struct RunOutcome {
  std::vector<CheckResult> checks;
  /// Files written, relative to the output directory.
  std::vector<std::string> files;
  double wall_seconds = 0.0;

  bool ok() const;
};

/// Runs cfg.experiment, writes its CSV/JSON outputs plus manifest.json and
/// checks.txt into `out`, and prints the check lines to `log`.
RunOutcome run_experiment(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

}  // namespace fibered
