#include "peakopt/opt/battery.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/sched/evaluate.hpp"
#include "peakopt/series/calendar.hpp"

#include <algorithm>
#include <cmath>

namespace peakopt::opt {

using sched::Activity;
using sched::Battery;
using sched::Instance;
using sched::Schedule;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kH = series::kPeriodHours;

bool battery_active(const Battery& b)
{
    return b.capacity > 0.0 && b.max_power > 0.0;
}

double price_weight(const Instance& inst, int t)
{
    return inst.prices[t] * kH / 1000.0;
}

std::vector<double> load_without_batteries(const Instance& inst, const Schedule& s)
{
    auto load = sched::activity_load(inst, s);
    for (std::size_t t = 0; t < load.size(); ++t) {
        load[t] += inst.base_load[static_cast<int>(t)];
    }
    return load;
}

Schedule without_actions(const Instance& inst, const Schedule& s)
{
    Schedule out = sched::empty_schedule(inst);
    out.starts = s.starts;
    return out;
}

// Charges at full power whenever off-peak and discharges the minimum in
// every peak period; if that runs dry nothing else can do better.
bool forced_possible(const Battery& b, const series::PeriodCalendar& cal, double eps)
{
    if (!battery_active(b) || b.max_power <= eps) {
        return false;
    }
    const double leg = std::sqrt(b.efficiency);
    double e = 0.0;
    for (int t = 0; t < cal.n_periods(); ++t) {
        if (cal.is_peak(t)) {
            e -= eps * kH / leg;
            if (e < 0.0) {
                return false;
            }
        } else {
            e = std::min(b.capacity, e + b.max_power * kH * leg);
        }
    }
    return true;
}

BatteryVariant build_variant(const Instance& inst, const BatteryMiqp& p, int designated, double eps)
{
    BatteryVariant v;
    v.designated = designated;
    const int n = inst.n_periods();
    const auto nb = inst.batteries.size();
    const bool no_peak_charge
        = p.strategy == Strategy::forced_discharge || p.strategy == Strategy::no_forced_discharge;
    auto& qp = v.qp;
    v.charge.assign(nb, std::vector<int>(static_cast<std::size_t>(n), -1));
    v.discharge.assign(nb, std::vector<int>(static_cast<std::size_t>(n), -1));

    for (std::size_t b = 0; b < nb; ++b) {
        const auto& bat = inst.batteries[b];
        if (!battery_active(bat)) {
            continue;
        }
        const double leg = std::sqrt(bat.efficiency);
        int prev = -1;
        for (int t = 0; t < n; ++t) {
            const double pi = price_weight(inst, t);
            const bool peak = inst.calendar.is_peak(t);
            int c = -1;
            if (!(no_peak_charge && peak)) {
                c = qp.add_variable(pi, 0.0, bat.max_power);
            }
            const double dlo = static_cast<int>(b) == designated && peak ? eps : 0.0;
            const int d = qp.add_variable(-pi, dlo, bat.max_power);
            const int s = qp.add_variable(0.0, 0.0, bat.capacity);
            const int row = qp.add_row(0.0);
            qp.add_entry(row, s, 1.0);
            if (prev >= 0) {
                qp.add_entry(row, prev, -1.0);
            }
            if (c >= 0) {
                qp.add_entry(row, c, -kH * leg);
            }
            qp.add_entry(row, d, kH / leg);
            v.charge[b][static_cast<std::size_t>(t)] = c;
            v.discharge[b][static_cast<std::size_t>(t)] = d;
            prev = s;
        }
    }

    const double kappa = inst.peak_charge_coeff;
    const bool liberal = p.strategy == Strategy::liberal;
    int m = -1;
    if (kappa > 0.0) {
        m = qp.add_variable(0.0, -kInf, liberal ? p.cap : kInf, 2.0 * kappa);
    }
    if (kappa > 0.0 || liberal) {
        for (int t = 0; t < n; ++t) {
            const auto k = static_cast<std::size_t>(t);
            const int w = qp.add_variable(0.0, 0.0, kInf);
            const int row = qp.add_row(m >= 0 ? -p.load[k] : p.cap - p.load[k]);
            for (std::size_t b = 0; b < nb; ++b) {
                if (v.charge[b][k] >= 0) {
                    qp.add_entry(row, v.charge[b][k], 1.0);
                }
                if (v.discharge[b][k] >= 0) {
                    qp.add_entry(row, v.discharge[b][k], -1.0);
                }
            }
            if (m >= 0) {
                qp.add_entry(row, m, -1.0);
            }
            qp.add_entry(row, w, 1.0);
        }
    }

    for (int t = 0; t < n; ++t) {
        v.constant += price_weight(inst, t) * p.load[static_cast<std::size_t>(t)];
    }
    v.constant += sched::once_off_net(inst, p.fixed);
    return v;
}

struct Candidate {
    Schedule schedule;
    double objective = kInf;
    bool ok = false;
};

// Net actions from a QP point, with a forward pass that pulls the state of
// charge back inside [0, capacity]. Netting simultaneous charge and discharge
// only raises the level, so the cap is enforced exactly; below zero only
// rounding noise appears, and trimming that would eat into a forced discharge.
Schedule extract(const Instance& inst, const BatteryMiqp& p, const BatteryVariant& v, const std::vector<double>& x)
{
    Schedule s = p.fixed;
    const int n = inst.n_periods();
    for (std::size_t b = 0; b < inst.batteries.size(); ++b) {
        const auto& bat = inst.batteries[b];
        auto& actions = s.battery_actions[bat.id];
        actions.assign(static_cast<std::size_t>(n), 0.0);
        if (!battery_active(bat)) {
            continue;
        }
        const double leg = std::sqrt(bat.efficiency);
        double e = 0.0;
        for (int t = 0; t < n; ++t) {
            const auto k = static_cast<std::size_t>(t);
            const int ci = v.charge[b][k];
            const int di = v.discharge[b][k];
            const double c = ci >= 0 ? std::clamp(x[static_cast<std::size_t>(ci)], 0.0, bat.max_power) : 0.0;
            const double d = std::clamp(x[static_cast<std::size_t>(di)], 0.0, bat.max_power);
            double a = c - d;
            if (std::abs(a) < 1e-9) {
                a = 0.0;
            }
            double next = e + (a >= 0.0 ? a * kH * leg : a * kH / leg);
            if (next > bat.capacity) {
                a = (bat.capacity - e) / (kH * leg);
                next = bat.capacity;
            } else if (next < -1e-7) {
                a = -e * leg / kH;
                next = 0.0;
            }
            actions[k] = a;
            e = next;
        }
    }
    return s;
}

Candidate optimise_batteries(const Instance& inst, const Schedule& activities, Strategy strategy,
                             const MiqpOptions& options)
{
    Candidate best;
    const BatteryMiqp p = build_battery_miqp(inst, activities, strategy, options);
    if (!p.feasible) {
        return best;
    }
    if (p.variants.empty()) {
        best.schedule = p.fixed;
        best.objective = schedule_cost(inst, best.schedule);
        best.ok = true;
        return best;
    }
    for (const auto& v : p.variants) {
        const QpResult r = solve_qp(v.qp, options.qp);
        if (r.status != QpStatus::optimal) {
            continue;
        }
        const double obj = r.objective + v.constant;
        if (!best.ok || obj < best.objective) {
            best.schedule = extract(inst, p, v, r.x);
            best.objective = obj;
            best.ok = true;
        }
    }
    return best;
}

// Single-activity start moves with battery actions held fixed.
class LocalMoves {
public:
    LocalMoves(const Instance& inst, Strategy strategy, Schedule s)
        : inst_(inst),
          strategy_(strategy),
          cur_(std::move(s)),
          rooms_(static_cast<std::size_t>(inst.n_periods()), 0),
          act_(static_cast<std::size_t>(inst.n_periods()), 0.0),
          fixed_(static_cast<std::size_t>(inst.n_periods()), 0.0)
    {
        const auto bat = sched::battery_power(inst, cur_);
        for (std::size_t t = 0; t < fixed_.size(); ++t) {
            fixed_[t] = inst.base_load[static_cast<int>(t)] + bat[t];
        }
        for (const auto& [id, start] : cur_.starts) {
            place(activity(id), start, 1);
        }
        cost_ = cost();
    }

    /// One first-improvement pass over all scheduled activities.
    bool sweep()
    {
        bool improved = false;
        for (const auto& a : inst_.activities) {
            const auto it = cur_.starts.find(a.id);
            if (it == cur_.starts.end()) {
                continue;
            }
            const int from = it->second;
            for (const int s : sched::admissible_starts(inst_, a)) {
                if (s == from || (!a.recurring() && !sched::runs_in_peak(inst_, a, s)) || !precedence_ok(a, s)) {
                    continue;
                }
                place(a, from, -1);
                place(a, s, 1);
                const double c = rooms_ok(a, s) && cap_ok() ? cost() : kInf;
                if (c < cost_ - 1e-9 * (1.0 + std::abs(cost_))) {
                    it->second = s;
                    cost_ = c;
                    improved = true;
                    break;
                }
                place(a, s, -1);
                place(a, from, 1);
            }
        }
        return improved;
    }

    const Schedule& schedule() const { return cur_; }

private:
    const Activity& activity(std::string_view id) const
    {
        return inst_.activities[static_cast<std::size_t>(inst_.activity_index(id))];
    }

    void place(const Activity& a, int start, int sign)
    {
        for (const auto& iv : sched::occurrences(inst_, a, start)) {
            for (int t = iv.begin; t < iv.end; ++t) {
                rooms_[static_cast<std::size_t>(t)] += sign * a.n_rooms;
                act_[static_cast<std::size_t>(t)] += sign * a.load();
            }
        }
    }

    bool rooms_ok(const Activity& a, int start) const
    {
        for (const auto& iv : sched::occurrences(inst_, a, start)) {
            for (int t = iv.begin; t < iv.end; ++t) {
                if (rooms_[static_cast<std::size_t>(t)] > inst_.n_rooms_total) {
                    return false;
                }
            }
        }
        return true;
    }

    bool precedence_ok(const Activity& a, int start) const
    {
        for (const auto& p : inst_.precedences) {
            if (p.before == a.id) {
                const auto it = cur_.starts.find(p.after);
                if (it != cur_.starts.end() && start + a.duration > it->second) {
                    return false;
                }
            } else if (p.after == a.id) {
                const auto it = cur_.starts.find(p.before);
                if (it == cur_.starts.end() || it->second + activity(p.before).duration > start) {
                    return false;
                }
            }
        }
        return true;
    }

    bool cap_ok() const
    {
        if (strategy_ != Strategy::liberal) {
            return true;
        }
        double cap = -kInf;
        double top = -kInf;
        for (std::size_t t = 0; t < act_.size(); ++t) {
            cap = std::max(cap, inst_.base_load[static_cast<int>(t)] + act_[t]);
            top = std::max(top, fixed_[t] + act_[t]);
        }
        return top <= cap + 1e-6;
    }

    double cost() const
    {
        std::vector<double> totals(act_.size());
        for (std::size_t t = 0; t < totals.size(); ++t) {
            totals[t] = fixed_[t] + act_[t];
        }
        const auto c = sched::cost_of_totals(inst_, totals);
        return c.energy + c.peak + sched::once_off_net(inst_, cur_);
    }

    const Instance& inst_;
    Strategy strategy_;
    Schedule cur_;
    std::vector<int> rooms_;
    std::vector<double> act_;
    std::vector<double> fixed_; // base load + battery power
    double cost_ = 0.0;
};

} // namespace

std::string to_string(Strategy s)
{
    switch (s) {
    case Strategy::conservative: return "conservative";
    case Strategy::forced_discharge: return "forced_discharge";
    case Strategy::no_forced_discharge: return "no_forced_discharge";
    case Strategy::liberal: return "liberal";
    case Strategy::very_liberal: return "very_liberal";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name)
{
    for (const auto s : kStrategies) {
        if (to_string(s) == name) {
            return s;
        }
    }
    throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

double schedule_cost(const Instance& inst, const Schedule& s)
{
    const auto act = sched::activity_load(inst, s);
    const auto bat = sched::battery_power(inst, s);
    std::vector<double> totals(act.size());
    for (std::size_t t = 0; t < totals.size(); ++t) {
        totals[t] = inst.base_load[static_cast<int>(t)] + act[t] + bat[t];
    }
    const auto c = sched::cost_of_totals(inst, totals);
    return c.energy + c.peak + sched::once_off_net(inst, s);
}

BatteryMiqp build_battery_miqp(const Instance& inst, const Schedule& fixed, Strategy strategy,
                               const MiqpOptions& options)
{
    BatteryMiqp p;
    p.strategy = strategy;
    p.fixed = without_actions(inst, fixed);
    p.load = load_without_batteries(inst, p.fixed);
    if (strategy == Strategy::liberal) {
        p.cap = *std::max_element(p.load.begin(), p.load.end());
    }
    const bool any = std::any_of(inst.batteries.begin(), inst.batteries.end(), battery_active);
    if (strategy == Strategy::conservative || !any) {
        p.feasible = strategy != Strategy::forced_discharge || inst.calendar.peak_count() == 0;
        return p;
    }
    if (strategy == Strategy::forced_discharge && inst.calendar.peak_count() > 0) {
        for (std::size_t b = 0; b < inst.batteries.size(); ++b) {
            if (forced_possible(inst.batteries[b], inst.calendar, options.min_discharge)) {
                p.variants.push_back(build_variant(inst, p, static_cast<int>(b), options.min_discharge));
            }
        }
        p.feasible = !p.variants.empty();
        return p;
    }
    p.variants.push_back(build_variant(inst, p, -1, options.min_discharge));
    return p;
}

bool satisfies_strategy(const Instance& inst, const Schedule& s, Strategy strategy, double min_discharge)
{
    const int n = inst.n_periods();
    std::vector<const std::vector<double>*> actions;
    for (const auto& b : inst.batteries) {
        const auto it = s.battery_actions.find(b.id);
        if (it == s.battery_actions.end() || static_cast<int>(it->second.size()) != n) {
            return false;
        }
        actions.push_back(&it->second);
    }
    switch (strategy) {
    case Strategy::conservative:
        for (const auto* a : actions) {
            if (std::any_of(a->begin(), a->end(), [](double v) { return std::abs(v) > 1e-9; })) {
                return false;
            }
        }
        return true;
    case Strategy::forced_discharge:
    case Strategy::no_forced_discharge:
        for (int t = 0; t < n; ++t) {
            if (!inst.calendar.is_peak(t)) {
                continue;
            }
            bool discharging = false;
            for (const auto* a : actions) {
                const double v = (*a)[static_cast<std::size_t>(t)];
                if (v > 1e-9) {
                    return false;
                }
                discharging = discharging || v <= -min_discharge + 1e-9;
            }
            if (strategy == Strategy::forced_discharge && !discharging) {
                return false;
            }
        }
        return true;
    case Strategy::liberal: {
        const auto load = load_without_batteries(inst, s);
        const auto bat = sched::battery_power(inst, s);
        const double cap = *std::max_element(load.begin(), load.end());
        for (std::size_t t = 0; t < load.size(); ++t) {
            if (load[t] + bat[t] > cap + 1e-6) {
                return false;
            }
        }
        return true;
    }
    case Strategy::very_liberal: return true;
    }
    return false;
}

MiqpResult solve_miqp(const Instance& inst, Strategy strategy, const std::vector<WarmStart>& warm_starts,
                      const MiqpOptions& options)
{
    if (warm_starts.empty()) {
        throw ContractError("solve_miqp needs at least one warm start");
    }
    Candidate best;
    auto consider = [&](Candidate c) {
        if (c.ok && (!best.ok || c.objective < best.objective)) {
            best = std::move(c);
        }
    };

    for (const auto& w : warm_starts) {
        if (w.objective && satisfies_strategy(inst, w.schedule, strategy, options.min_discharge)) {
            consider({w.schedule, *w.objective, true});
        }
        Candidate cur = optimise_batteries(inst, without_actions(inst, w.schedule), strategy, options);
        if (!cur.ok) {
            continue;
        }
        for (int round = 0; round < options.local_rounds; ++round) {
            LocalMoves moves(inst, strategy, cur.schedule);
            if (!moves.sweep()) {
                break;
            }
            Candidate next = optimise_batteries(inst, moves.schedule(), strategy, options);
            if (!next.ok || !(next.objective < cur.objective)) {
                break;
            }
            cur = std::move(next);
        }
        consider(std::move(cur));
    }

    MiqpResult result;
    if (best.ok) {
        result.schedule = std::move(best.schedule);
        result.objective = best.objective;
        result.solved = true;
    } else {
        result.schedule = warm_starts.front().schedule;
        result.objective = schedule_cost(inst, result.schedule);
    }
    return result;
}

} // namespace peakopt::opt
