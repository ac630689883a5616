#pragma once

#include "peakopt/opt/battery.hpp"
#include "peakopt/opt/mip.hpp"

#include <optional>
#include <string>
#include <vector>

namespace peakopt::opt {

enum class Branch { recurring_only, with_once_off };

std::string to_string(Branch b);

struct BranchResult {
    sched::Schedule schedule;
    double objective = 0.0;          // solver objective
    double evaluated_forecast = 0.0; // evaluate_cost under the instance load
    bool solved = false;
};

struct PipelineResult {
    std::string instance;
    Strategy strategy = Strategy::no_forced_discharge;
    BranchResult recurring_only;
    BranchResult with_once_off;
    Branch chosen = Branch::recurring_only;
    std::optional<double> evaluated_actual;

    const BranchResult& chosen_result() const
    {
        return chosen == Branch::recurring_only ? recurring_only : with_once_off;
    }
};

struct PipelineOptions {
    MipOptions mip;
    MiqpOptions miqp;
    /// Incumbents of each MIP, best first, that seed the battery step.
    int warm_starts = 3;
};

/// Recurring MIP, once-off extension, battery MIQP and branch selection for
/// every strategy from the tightest up to `last`. Each strategy is seeded
/// with the previous strategy's result as well as the MIP incumbents, so the
/// objectives are ordered along the chain. The instance load is the
/// forecast; `actual` adds the evaluated cost under realised load.
/// Throws InfeasibleError with the MIP certificate when the recurring step
/// has no solution.
std::vector<PipelineResult> run_pipeline_chain(const sched::Instance& inst, Strategy last,
                                               const std::optional<series::TimeSeries>& actual = std::nullopt,
                                               const PipelineOptions& options = {});

PipelineResult run_pipeline(const sched::Instance& inst, Strategy strategy,
                            const std::optional<series::TimeSeries>& actual = std::nullopt,
                            const PipelineOptions& options = {});

struct StrategyTotal {
    Strategy strategy = Strategy::conservative;
    double objective = 0.0;
    double evaluated_forecast = 0.0;
    double evaluated_actual = 0.0;
};

struct Comparison {
    std::vector<StrategyTotal> totals;                 // one per strategy, tightest first
    std::vector<std::vector<PipelineResult>> results; // [instance][strategy]
};

/// Optimises each instance (load = forecast) under all five strategies and
/// sums costs evaluated under the matching actual load. Instances run in
/// parallel; results keep input order.
Comparison compare_strategies(const std::vector<sched::Instance>& instances,
                              const std::vector<series::TimeSeries>& actuals, const PipelineOptions& options = {});

} // namespace peakopt::opt
