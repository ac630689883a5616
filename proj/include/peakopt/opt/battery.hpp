#pragma once

#include "peakopt/opt/qp.hpp"
#include "peakopt/sched/model.hpp"

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace peakopt::opt {

/// Listed tightest first; each feasible set contains the previous one
/// except where noted in build_battery_miqp.
enum class Strategy { conservative, forced_discharge, no_forced_discharge, liberal, very_liberal };

inline constexpr std::array<Strategy, 5> kStrategies{Strategy::conservative, Strategy::forced_discharge,
                                                     Strategy::no_forced_discharge, Strategy::liberal,
                                                     Strategy::very_liberal};

std::string to_string(Strategy s);
/// Throws ConfigError for unknown names.
Strategy parse_strategy(std::string_view name);

struct MiqpOptions {
    double min_discharge = 0.1; // kW, forced_discharge
    int local_rounds = 3;
    QpOptions qp;
};

/// One continuous QP of the battery problem. For forced_discharge the
/// per-period discharge indicators are fixed by designating one battery
/// that discharges at least min_discharge in every peak period.
struct BatteryVariant {
    QuadraticProgram qp;
    int designated = -1;
    // per battery, per period; -1 when the variable is absent
    std::vector<std::vector<int>> charge;
    std::vector<std::vector<int>> discharge;
    double constant = 0.0;
};

struct BatteryMiqp {
    Strategy strategy = Strategy::conservative;
    sched::Schedule fixed;    // activity starts, zero battery actions
    std::vector<double> load; // base load plus activity load
    double cap = std::numeric_limits<double>::infinity(); // liberal bound on totals
    std::vector<BatteryVariant> variants; // empty when no battery can act
    bool feasible = true;
};

/// Energy + peak charge as a function of battery actions for fixed activity
/// starts, with the strategy's constraints:
///   conservative         no battery variables;
///   forced_discharge     no peak charging, one designated battery discharging
///                        in every peak period (one variant per battery that
///                        passes a greedy feasibility check);
///   no_forced_discharge  no peak charging;
///   liberal              totals capped at the largest load without batteries;
///   very_liberal         nothing extra.
/// Liberal does not contain no_forced_discharge in general; solve_miqp
/// carries candidates across when they satisfy the tighter cap.
BatteryMiqp build_battery_miqp(const sched::Instance& inst, const sched::Schedule& fixed, Strategy strategy,
                               const MiqpOptions& options = {});

struct WarmStart {
    sched::Schedule schedule;
    /// Objective known for the schedule as given, battery actions included.
    std::optional<double> objective;
};

struct MiqpResult {
    sched::Schedule schedule;
    double objective = 0.0; // energy + peak + once-off net under the instance load
    bool solved = false;    // false when the first warm start was carried unchanged
};

/// For every warm start: optimise battery actions, then single-activity
/// start moves with actions fixed, re-optimising the batteries after each
/// improving round. Warm starts with a known objective that already satisfy
/// the strategy compete as they are. Returns the best candidate.
MiqpResult solve_miqp(const sched::Instance& inst, Strategy strategy, const std::vector<WarmStart>& warm_starts,
                      const MiqpOptions& options = {});

/// Battery actions obey the strategy (tolerances 1e-9 kW on signs, 1e-6 kW
/// on the liberal cap).
bool satisfies_strategy(const sched::Instance& inst, const sched::Schedule& s, Strategy strategy,
                        double min_discharge = 0.1);

/// Energy + peak + once-off net of a schedule under the instance load,
/// without validation.
double schedule_cost(const sched::Instance& inst, const sched::Schedule& s);

} // namespace peakopt::opt
