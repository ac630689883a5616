#pragma once

#include "peakopt/cli/config.hpp"

#include <iosfwd>
#include <optional>

namespace peakopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInput = 2;

/// Fits one pooled forest on every non-constant series and writes
/// <output>/forecast/<series>.csv, plus <output>/mase.csv when actuals are
/// configured.
int cmd_forecast(const RunConfig& cfg, std::ostream& out);

/// Runs the pipeline on every instance. Writes <output>/schedules/<name>.txt
/// and <output>/results.csv; an infeasible instance gets a row with status
/// "infeasible" and the command returns kExitValidation after the others finish.
int cmd_optimize(const RunConfig& cfg, std::ostream& out);

/// All five strategies on every instance, costs evaluated under the actuals.
/// Writes <output>/comparison.csv and <output>/comparison_instances.csv.
int cmd_compare(const RunConfig& cfg, std::ostream& out);

/// Prints the cost breakdown; kExitValidation with the violation list when
/// the schedule is invalid.
int cmd_evaluate(const fs::path& instance, const fs::path& schedule, const std::optional<fs::path>& load,
                 std::ostream& out);

/// Seeded instances (or the noisy-forecast fixture) written to <output>.
int cmd_gen_instances(const RunConfig& cfg, std::ostream& out);

/// Parses argv, dispatches and maps library errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace peakopt::cli
