#pragma once

#include "peakopt/series/time_series.hpp"

#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace peakopt::forest {

template <class Config>
struct ConfigDelta {
    std::string description;
    std::function<Config(const Config&)> apply;
};

struct SearchStep {
    std::string description;
    double mase_before = 0.0;
    /// NaN when evaluation failed.
    double mase_after = std::numeric_limits<double>::quiet_NaN();
    bool retained = false;
    std::string error;
};

struct ConfigSearchLog {
    double initial_mase = 0.0;
    double final_mase = 0.0;
    std::vector<SearchStep> steps;
};

/// Tries each delta in order on top of the current configuration and keeps it
/// only when the mean MASE strictly decreases. A delta whose application or
/// evaluation throws is logged with its error and skipped. The base
/// configuration itself must evaluate.
template <class Config>
std::pair<Config, ConfigSearchLog> greedy_config_search(Config base, const std::vector<ConfigDelta<Config>>& candidates,
                                                        const std::function<series::MaseReport(const Config&)>& eval)
{
    ConfigSearchLog log;
    double current = eval(base).mean;
    log.initial_mase = current;
    for (const auto& delta : candidates) {
        SearchStep step;
        step.description = delta.description;
        step.mase_before = current;
        try {
            Config trial = delta.apply(base);
            step.mase_after = eval(trial).mean;
            if (step.mase_after < current) {
                step.retained = true;
                base = std::move(trial);
                current = step.mase_after;
            }
        } catch (const std::exception& e) {
            step.error = e.what();
        }
        log.steps.push_back(std::move(step));
    }
    log.final_mase = current;
    return {std::move(base), std::move(log)};
}

} // namespace peakopt::forest
