// SPDX-License-Identifier: Apache-2.0
//
// Command runners behind the CLI: each consumes a validated config, writes
// deterministic CSV/JSON (and SVG) artifacts into cfg.out and returns the
// exit status together with the JSON summary.

#pragma once

#include "nekho/config.hpp"

#include <string>
#include <vector>

namespace nekho {

struct CommandResult {
  int exit_code = 0;  // 0 all invariants held, 1 violations reported
  Json summary;
  std::vector<std::string> artifacts;  // file names relative to cfg.out
};

std::vector<std::string> command_names();

/// Dispatch on cfg.command. Throws nekho::Error for configuration and
/// runtime failures.
CommandResult run_command(const ExperimentConfig& cfg);

CommandResult run_lattice(const ExperimentConfig& cfg);
CommandResult run_partition(const ExperimentConfig& cfg);
CommandResult run_verify(const ExperimentConfig& cfg);
CommandResult run_steep(const ExperimentConfig& cfg);
CommandResult run_actions(const ExperimentConfig& cfg);
CommandResult run_invert(const ExperimentConfig& cfg);
CommandResult run_nf_split(const ExperimentConfig& cfg);
CommandResult run_nf_solve(const ExperimentConfig& cfg);
CommandResult run_evolve(const ExperimentConfig& cfg);
CommandResult run_counterexample(const ExperimentConfig& cfg);
CommandResult run_calibrate(const ExperimentConfig& cfg);

/// "%.17g"; shortest text that round-trips is not needed, only stability.
std::string fmt_double(double x);

}  // namespace nekho
