#pragma once

#include "peakopt/sched/model.hpp"

#include <string>
#include <vector>

namespace testing_support {

using namespace peakopt;

/// Instance over `days` days from Monday 2020-10-05 with default peak hours,
/// flat load and price.
inline sched::Instance flat_instance(int days, int rooms, double load = 0.0, double price = 0.0, double coeff = 0.0)
{
    sched::Instance inst;
    inst.name = "test";
    inst.calendar = series::build_calendar(series::parse_date("2020-10-05"), days, series::default_peak_windows());
    const auto n = static_cast<std::size_t>(inst.calendar.n_periods());
    inst.base_load = series::TimeSeries(inst.calendar, std::vector<double>(n, load));
    inst.prices = series::TimeSeries(inst.calendar, std::vector<double>(n, price));
    inst.n_rooms_total = rooms;
    inst.peak_charge_coeff = coeff;
    return inst;
}

inline sched::Activity recurring(std::string id, int duration, int rooms, double load_per_room,
                                 std::vector<int> starts = {})
{
    sched::Activity a;
    a.id = std::move(id);
    a.kind = sched::ActivityKind::recurring;
    a.duration = duration;
    a.n_rooms = rooms;
    a.load_per_room = load_per_room;
    a.allowed_starts = std::move(starts);
    return a;
}

inline sched::Activity once_off(std::string id, int duration, int rooms, double load_per_room, double value,
                                double penalty, std::vector<int> starts = {})
{
    sched::Activity a = recurring(std::move(id), duration, rooms, load_per_room, std::move(starts));
    a.kind = sched::ActivityKind::once_off;
    a.value = value;
    a.penalty = penalty;
    return a;
}

inline void set_load(sched::Instance& inst, const std::vector<double>& v)
{
    inst.base_load = series::TimeSeries(inst.calendar, v);
}

inline void set_prices(sched::Instance& inst, const std::vector<double>& v)
{
    inst.prices = series::TimeSeries(inst.calendar, v);
}

} // namespace testing_support
