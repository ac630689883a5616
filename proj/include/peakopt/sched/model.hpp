#pragma once

#include "peakopt/series/time_series.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace peakopt::sched {

using series::PeriodCalendar;
using series::TimeSeries;

enum class ActivityKind { recurring, once_off };

struct Activity {
    std::string id;
    ActivityKind kind = ActivityKind::recurring;
    int duration = 1;
    int n_rooms = 1;
    double load_per_room = 0.0;
    /// Once-off only: earned when every running period is a peak period.
    double value = 0.0;
    /// Once-off only: paid when any running period is off-peak.
    double penalty = 0.0;
    /// Admissible start periods; empty means every start that fits. For
    /// recurring activities starts are first-week periods.
    std::vector<int> allowed_starts;

    double load() const { return n_rooms * load_per_room; }
    bool recurring() const { return kind == ActivityKind::recurring; }
    friend bool operator==(const Activity&, const Activity&) = default;
};

struct Precedence {
    std::string before;
    std::string after;
    friend bool operator==(const Precedence&, const Precedence&) = default;
};

struct Battery {
    std::string id;
    double capacity = 0.0;  // kWh
    double max_power = 0.0; // kW, both directions
    double efficiency = 1.0; // round trip
    friend bool operator==(const Battery&, const Battery&) = default;
};

enum class SizeClass { small, large };

struct Instance {
    std::string name;
    PeriodCalendar calendar;
    std::vector<Activity> activities;
    std::vector<Precedence> precedences;
    int n_rooms_total = 0;
    std::vector<Battery> batteries;
    TimeSeries base_load;
    TimeSeries prices;
    double peak_charge_coeff = 0.0; // $/kW^2 over the horizon
    SizeClass size_class = SizeClass::small;

    int n_periods() const { return calendar.n_periods(); }
    /// Periods a recurring start may occupy: one week, or the whole horizon
    /// when it is shorter.
    int recurrence_window() const;
    /// -1 when absent.
    int activity_index(std::string_view id) const;

    friend bool operator==(const Instance&, const Instance&) = default;
};

/// Half-open period interval.
struct Interval {
    int begin = 0;
    int end = 0;
};

/// Running intervals of an activity started at `start`. Recurring activities
/// repeat every week; an occurrence running past the horizon is truncated.
std::vector<Interval> occurrences(const Instance& inst, const Activity& a, int start);

/// Start lies in range (recurring: within the first week without crossing
/// into the next; once-off: inside the horizon) and in allowed_starts if set.
bool start_admissible(const Instance& inst, const Activity& a, int start);

/// Every admissible start in ascending order.
std::vector<int> admissible_starts(const Instance& inst, const Activity& a);

/// True when every period the once-off activity runs in is a peak period.
bool runs_in_peak(const Instance& inst, const Activity& a, int start);

/// Activity starts plus signed battery power per period (kW, positive =
/// charge). Battery vectors have n_periods entries.
struct Schedule {
    int n_periods = 0;
    std::map<std::string, int, std::less<>> starts;
    std::map<std::string, std::vector<double>, std::less<>> battery_actions;

    friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Empty schedule sized for the instance with zero action vectors for every battery.
Schedule empty_schedule(const Instance& inst);

/// Per-period load added by scheduled activities.
std::vector<double> activity_load(const Instance& inst, const Schedule& s);
/// Per-period sum of battery actions.
std::vector<double> battery_power(const Instance& inst, const Schedule& s);

// ---- documents -------------------------------------------------------------

/// Parses a `peakopt-instance v1` document. `file` series references are
/// resolved against base_dir. Throws ParseError for syntax problems,
/// ReferenceError for unknown ids, ValidationError for invalid data or a
/// precedence cycle and ShapeError when a series does not match the horizon.
Instance parse_instance(std::string_view text, const std::filesystem::path& base_dir = {});
/// Self-contained form with inline series.
std::string serialize_instance(const Instance& inst);

std::string serialize_schedule(const Schedule& s);
Schedule parse_schedule(std::string_view text);

} // namespace peakopt::sched
