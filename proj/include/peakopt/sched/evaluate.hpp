#pragma once

#include "peakopt/sched/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace peakopt::sched {

enum class ViolationKind {
    unknown_activity,
    unknown_battery,
    missing_recurring,
    bad_start,
    room_limit,
    precedence,
    power_bound,
    state_of_charge,
    shape,
};

struct Violation {
    ViolationKind kind;
    std::string subject; // activity or battery id
    int period = -1;
    std::string message;
};

/// Tolerance on state-of-charge bounds, kWh.
inline constexpr double kSocTolerance = 1e-6;
/// Tolerance on battery power bounds, kW.
inline constexpr double kPowerTolerance = 1e-9;

/// Energy stored after each period for one battery's action vector, starting
/// empty: charging adds |a| * 0.25 h * sqrt(eff), discharging removes
/// |a| * 0.25 h / sqrt(eff).
std::vector<double> state_of_charge(const Battery& b, std::span<const double> actions);

/// Empty result means valid.
std::vector<Violation> validate_schedule(const Instance& inst, const Schedule& s);

struct CostBreakdown {
    double energy = 0.0;
    double peak = 0.0;
    double once_off_net = 0.0;
    double total = 0.0;
    double max_load = 0.0;
};

/// total_t = load_t + activity load + battery power;
/// energy = Σ price_t total_t 0.25 / 1000, peak = coeff max_t(total_t)^2,
/// once_off_net = penalties incurred − values realised.
/// Throws ContractError when the schedule is invalid, the load or prices
/// have gaps, or the load calendar differs from the instance.
CostBreakdown evaluate_cost(const Instance& inst, const Schedule& s, const TimeSeries& load);

/// Energy + peak for given per-period totals.
CostBreakdown cost_of_totals(const Instance& inst, std::span<const double> totals);
double once_off_net(const Instance& inst, const Schedule& s);

std::string to_string(ViolationKind k);

} // namespace peakopt::sched
