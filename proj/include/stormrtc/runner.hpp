#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stormrtc/config.hpp"
#include "stormrtc/metrics.hpp"

namespace stormrtc {

struct RunOptions {
  std::vector<std::string> controllers;  // empty: use the config list
  std::optional<std::uint64_t> seed;
  std::string out_dir;                   // empty: use the config directory
  std::optional<int> decimate;
};

struct RunResult {
  std::vector<SimulationLog> logs;
  std::vector<ComparisonRow> comparison;
};

/// Deterministic per-controller RNG stream.
std::uint64_t controller_seed(std::uint64_t base, const std::string& name);

std::unique_ptr<Controller> make_controller(const std::string& name, const Scenario& s,
                                            std::uint64_t seed);

/// Runs one controller closed-loop over the scenario window.
SimulationLog run_controller(const Scenario& s, const std::string& name,
                             std::uint64_t seed);

/// Runs the requested controllers concurrently and builds the comparison.
RunResult run_scenario(const Scenario& s, const RunOptions& opt);

/// Writes per-controller logs, the metrics table (CSV + aligned text),
/// duration curves and MPC diagnostics into `dir`. Files are written
/// atomically (temp + rename).
void write_outputs(const RunResult& result, const Scenario& s, const std::string& dir,
                   int decimate);

/// Whole-chain and per-subsystem volume audits from a completed log.
struct MassAudit {
  double rain_m3 = 0.0;
  double watershed_error_frac = 0.0;  // vs rain volume
  double reservoir_error_frac = 0.0;  // vs reservoir inflow volume
  double channel_error_frac = 0.0;    // vs channel inflow volume
  double chain_error_frac = 0.0;      // vs rain volume
};
MassAudit audit_mass_balance(const Scenario& s, const SimulationLog& log);

}  // namespace stormrtc
