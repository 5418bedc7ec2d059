#pragma once

#include "cutstefan/benchmark.hpp"
#include "cutstefan/config.hpp"
#include "cutstefan/output.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cutstefan {

struct RunOptions {
  /// Snapshot to resume from.
  std::optional<std::string> restart;
  /// Called after every completed step.
  std::function<void(const StepRecord&)> on_step;
};

struct RunResult {
  bool ok = true;
  std::string error;
  int steps = 0;
  double t = 0.0;
  int retries = 0;
  int redistances = 0;
  std::vector<std::string> files;
  std::optional<CavityMetrics> cavity;
  /// Manufactured scenario only.
  std::optional<ErrorAggregate> errors;
};

/// Runs the configured scenario to tf. Outputs (VTK pair, state snapshot)
/// go to output.dir every output.every steps and after the last step, plus
/// steps.csv; ablation runs also write profile.csv. A step that fails after
/// the halving retry stops the run; the last good state is kept in
/// last_good.json.
RunResult run(const RunConfig& config, const RunOptions& options = {});

} // namespace cutstefan
