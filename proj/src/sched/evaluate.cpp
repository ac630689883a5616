#include "peakopt/sched/evaluate.hpp"

#include "peakopt/errors.hpp"

#include <algorithm>
#include <cmath>

namespace peakopt::sched {

std::string to_string(ViolationKind k)
{
    switch (k) {
    case ViolationKind::unknown_activity: return "unknown_activity";
    case ViolationKind::unknown_battery: return "unknown_battery";
    case ViolationKind::missing_recurring: return "missing_recurring";
    case ViolationKind::bad_start: return "bad_start";
    case ViolationKind::room_limit: return "room_limit";
    case ViolationKind::precedence: return "precedence";
    case ViolationKind::power_bound: return "power_bound";
    case ViolationKind::state_of_charge: return "state_of_charge";
    case ViolationKind::shape: return "shape";
    }
    return "?";
}

std::vector<double> state_of_charge(const Battery& b, std::span<const double> actions)
{
    const double leg = std::sqrt(b.efficiency);
    std::vector<double> soc(actions.size());
    double e = 0.0;
    for (std::size_t t = 0; t < actions.size(); ++t) {
        const double a = actions[t];
        e += a >= 0.0 ? a * series::kPeriodHours * leg : a * series::kPeriodHours / leg;
        soc[t] = e;
    }
    return soc;
}

std::vector<Violation> validate_schedule(const Instance& inst, const Schedule& s)
{
    std::vector<Violation> out;
    const int n = inst.n_periods();
    if (s.n_periods != n) {
        out.push_back({ViolationKind::shape, "", -1,
                       "schedule has " + std::to_string(s.n_periods) + " periods, instance has " + std::to_string(n)});
    }

    for (const auto& [id, start] : s.starts) {
        if (inst.activity_index(id) < 0) {
            out.push_back({ViolationKind::unknown_activity, id, -1, "schedule starts an unknown activity"});
        }
    }
    std::vector<int> rooms(static_cast<std::size_t>(n), 0);
    for (const auto& a : inst.activities) {
        const auto it = s.starts.find(a.id);
        if (it == s.starts.end()) {
            if (a.recurring()) {
                out.push_back({ViolationKind::missing_recurring, a.id, -1, "recurring activity is not scheduled"});
            }
            continue;
        }
        if (!start_admissible(inst, a, it->second)) {
            out.push_back({ViolationKind::bad_start, a.id, it->second,
                           a.recurring() ? "start must lie in the first week, fit inside it and be allowed"
                                         : "start must fit inside the horizon and be allowed"});
            continue;
        }
        for (const auto& iv : occurrences(inst, a, it->second)) {
            for (int t = iv.begin; t < iv.end; ++t) {
                rooms[static_cast<std::size_t>(t)] += a.n_rooms;
            }
        }
    }
    for (int t = 0; t < n; ++t) {
        if (rooms[static_cast<std::size_t>(t)] > inst.n_rooms_total) {
            out.push_back({ViolationKind::room_limit, "", t,
                           std::to_string(rooms[static_cast<std::size_t>(t)]) + " rooms in use, "
                               + std::to_string(inst.n_rooms_total) + " available"});
        }
    }

    for (const auto& p : inst.precedences) {
        const auto after = s.starts.find(p.after);
        if (after == s.starts.end()) {
            continue;
        }
        const auto before = s.starts.find(p.before);
        const int bi = inst.activity_index(p.before);
        if (before == s.starts.end()) {
            out.push_back({ViolationKind::precedence, p.after, after->second,
                           "scheduled after '" + p.before + "' which is not scheduled"});
            continue;
        }
        const int finish = before->second + inst.activities[static_cast<std::size_t>(bi)].duration;
        if (finish > after->second) {
            out.push_back({ViolationKind::precedence, p.after, after->second,
                           "starts before '" + p.before + "' finishes (period " + std::to_string(finish) + ")"});
        }
    }

    for (const auto& [id, actions] : s.battery_actions) {
        const auto bit = std::find_if(inst.batteries.begin(), inst.batteries.end(),
                                      [&](const Battery& b) { return b.id == id; });
        if (bit == inst.batteries.end()) {
            out.push_back({ViolationKind::unknown_battery, id, -1, "schedule drives an unknown battery"});
            continue;
        }
        if (static_cast<int>(actions.size()) != n) {
            out.push_back({ViolationKind::shape, id, -1, "battery action vector has the wrong length"});
            continue;
        }
        for (int t = 0; t < n; ++t) {
            if (!std::isfinite(actions[static_cast<std::size_t>(t)])
                || std::abs(actions[static_cast<std::size_t>(t)]) > bit->max_power + kPowerTolerance) {
                out.push_back({ViolationKind::power_bound, id, t, "action exceeds max power"});
            }
        }
        const auto soc = state_of_charge(*bit, actions);
        for (int t = 0; t < n; ++t) {
            const double e = soc[static_cast<std::size_t>(t)];
            if (e < -kSocTolerance || e > bit->capacity + kSocTolerance) {
                out.push_back({ViolationKind::state_of_charge, id, t,
                               "state of charge " + std::to_string(e) + " outside [0, "
                                   + std::to_string(bit->capacity) + "]"});
                break; // later levels follow from the same excursion
            }
        }
    }
    return out;
}

CostBreakdown cost_of_totals(const Instance& inst, std::span<const double> totals)
{
    CostBreakdown c;
    double max_load = totals.empty() ? 0.0 : totals[0];
    for (std::size_t t = 0; t < totals.size(); ++t) {
        c.energy += inst.prices[static_cast<int>(t)] * totals[t] * series::kPeriodHours / 1000.0;
        max_load = std::max(max_load, totals[t]);
    }
    c.max_load = max_load;
    c.peak = inst.peak_charge_coeff * max_load * max_load;
    c.total = c.energy + c.peak;
    return c;
}

double once_off_net(const Instance& inst, const Schedule& s)
{
    double net = 0.0;
    for (const auto& a : inst.activities) {
        if (a.recurring()) {
            continue;
        }
        const auto it = s.starts.find(a.id);
        if (it == s.starts.end()) {
            continue;
        }
        net += runs_in_peak(inst, a, it->second) ? -a.value : a.penalty;
    }
    return net;
}

CostBreakdown evaluate_cost(const Instance& inst, const Schedule& s, const TimeSeries& load)
{
    if (load.size() != inst.n_periods()) {
        throw ContractError("load series does not match the instance horizon");
    }
    if (!load.fully_observed() || !inst.prices.fully_observed()) {
        throw ContractError("load and price series must be fully observed for costing");
    }
    const auto violations = validate_schedule(inst, s);
    if (!violations.empty()) {
        throw ContractError("schedule is invalid (" + std::to_string(violations.size())
                            + " violations, first: " + violations.front().message + ")");
    }
    const auto act = activity_load(inst, s);
    const auto bat = battery_power(inst, s);
    std::vector<double> totals(act.size());
    for (std::size_t t = 0; t < totals.size(); ++t) {
        totals[t] = load[static_cast<int>(t)] + act[t] + bat[t];
    }
    CostBreakdown c = cost_of_totals(inst, totals);
    c.once_off_net = once_off_net(inst, s);
    c.total = c.energy + c.peak + c.once_off_net;
    return c;
}

} // namespace peakopt::sched
