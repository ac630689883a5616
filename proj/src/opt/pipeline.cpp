#include "peakopt/opt/pipeline.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/sched/evaluate.hpp"

#include <exception>

namespace peakopt::opt {

using sched::Instance;
using sched::Schedule;

namespace {

std::vector<WarmStart> seeds(const IncumbentPool& pool, int count)
{
    std::vector<WarmStart> out;
    const auto& e = pool.entries();
    for (auto it = e.rbegin(); it != e.rend() && static_cast<int>(out.size()) < count; ++it) {
        out.push_back({it->schedule, std::nullopt});
    }
    return out;
}

BranchResult finish(const Instance& inst, MiqpResult r)
{
    BranchResult b;
    b.evaluated_forecast = sched::evaluate_cost(inst, r.schedule, inst.base_load).total;
    b.schedule = std::move(r.schedule);
    b.objective = r.objective;
    b.solved = r.solved;
    return b;
}

} // namespace

std::string to_string(Branch b)
{
    return b == Branch::recurring_only ? "recurring_only" : "with_once_off";
}

std::vector<PipelineResult> run_pipeline_chain(const Instance& inst, Strategy last,
                                               const std::optional<series::TimeSeries>& actual,
                                               const PipelineOptions& options)
{
    const MipResult step1 = solve_mip(build_recurring_mip(inst), options.mip);
    if (step1.pool.empty()) {
        throw InfeasibleError("instance " + inst.name + ": " + step1.certificate);
    }
    const MipResult step2 = solve_mip(extend_once_off(inst, step1.schedule), options.mip);
    const bool has_once_off = !step2.pool.empty() && step2.schedule.starts != step1.schedule.starts;

    const auto seeds_a = seeds(step1.pool, options.warm_starts);
    const auto seeds_b = has_once_off ? seeds(step2.pool, options.warm_starts) : seeds_a;

    std::vector<PipelineResult> chain;
    std::optional<WarmStart> prev_a;
    std::optional<WarmStart> prev_b;
    for (const auto strategy : kStrategies) {
        auto warm_a = seeds_a;
        if (prev_a) {
            warm_a.push_back(*prev_a);
        }
        PipelineResult r;
        r.instance = inst.name;
        r.strategy = strategy;
        r.recurring_only = finish(inst, solve_miqp(inst, strategy, warm_a, options.miqp));
        if (has_once_off) {
            auto warm_b = seeds_b;
            if (prev_b) {
                warm_b.push_back(*prev_b);
            }
            r.with_once_off = finish(inst, solve_miqp(inst, strategy, warm_b, options.miqp));
        } else {
            r.with_once_off = r.recurring_only;
        }
        r.chosen = r.with_once_off.evaluated_forecast < r.recurring_only.evaluated_forecast ? Branch::with_once_off
                                                                                           : Branch::recurring_only;
        if (actual) {
            r.evaluated_actual = sched::evaluate_cost(inst, r.chosen_result().schedule, *actual).total;
        }
        prev_a = WarmStart{r.recurring_only.schedule, r.recurring_only.objective};
        prev_b = WarmStart{r.with_once_off.schedule, r.with_once_off.objective};
        chain.push_back(std::move(r));
        if (strategy == last) {
            break;
        }
    }
    return chain;
}

PipelineResult run_pipeline(const Instance& inst, Strategy strategy, const std::optional<series::TimeSeries>& actual,
                            const PipelineOptions& options)
{
    return run_pipeline_chain(inst, strategy, actual, options).back();
}

Comparison compare_strategies(const std::vector<Instance>& instances, const std::vector<series::TimeSeries>& actuals,
                              const PipelineOptions& options)
{
    if (instances.size() != actuals.size()) {
        throw ContractError("compare_strategies needs one actual series per instance");
    }
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (!(actuals[i].calendar() == instances[i].calendar)) {
            throw ContractError("actual load for " + instances[i].name + " has a different calendar");
        }
    }
    Comparison out;
    out.results.resize(instances.size());
    std::vector<std::exception_ptr> errors(instances.size());
    const auto count = static_cast<long>(instances.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out.results[k] = run_pipeline_chain(instances[k], Strategy::very_liberal, actuals[k], options);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    for (std::size_t s = 0; s < kStrategies.size(); ++s) {
        StrategyTotal t;
        t.strategy = kStrategies[s];
        for (const auto& per : out.results) {
            const auto& r = per[s];
            t.objective += r.chosen_result().objective;
            t.evaluated_forecast += r.chosen_result().evaluated_forecast;
            t.evaluated_actual += r.evaluated_actual.value_or(0.0);
        }
        out.totals.push_back(t);
    }
    return out;
}

} // namespace peakopt::opt
