#pragma once

// Executes a RunConfig: one protocol point or a sweep grid, plus file outputs.

#include <iosfwd>
#include <optional>
#include <vector>

#include "parityforge/config.hpp"
#include "parityforge/report.hpp"

namespace parityforge {

/// Everything a single point produces.
struct PointOutcome {
  PointReport report;
  State state;
  /// Nominal displacement of every logged step.
  std::vector<complex> step_points;
  /// Wall-clock seconds: protocol, analysis.
  double protocol_seconds = 0.0;
  double analysis_seconds = 0.0;
};

/// Runs one point. Library errors propagate.
PointOutcome execute_point(const RunConfig& config);

/// Cartesian product of the non-empty sweep axes, first axis varying slowest.
std::vector<std::vector<std::pair<std::string, double>>> sweep_grid(const std::vector<SweepAxis>& axes);

/// Evaluates every grid point on `jobs` workers. Failed points carry an error
/// record; results are in grid order regardless of scheduling.
std::vector<SweepPoint> run_sweep(const RunConfig& config, unsigned jobs);

/// Worker count: PARITYFORGE_JOBS if set, else `flag`, else hardware concurrency.
unsigned resolve_jobs(std::optional<unsigned> flag);

/// Validates, runs and writes all requested outputs to config.output_dir.
/// Returns the process exit status; failures also write error.json and print
/// the error record as one JSON line on `err`.
int run(const RunConfig& config, unsigned jobs, std::ostream& err);

/// Exit statuses of `run`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRunError = 3;
inline constexpr int kExitIoError = 4;

}  // namespace parityforge
