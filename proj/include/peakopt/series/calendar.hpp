#pragma once

#include <array>
#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace peakopt::series {

using Date = std::chrono::year_month_day;

inline constexpr int kPeriodsPerDay = 96;
inline constexpr int kPeriodsPerWeek = 7 * kPeriodsPerDay;
inline constexpr double kPeriodHours = 0.25;

/// A recurring high-tariff window: the listed weekdays (0 = Monday) between
/// start_hour inclusive and end_hour exclusive, in local time.
struct PeakWindow {
    std::array<bool, 7> weekdays{};
    double start_hour = 0.0;
    double end_hour = 0.0;

    friend bool operator==(const PeakWindow&, const PeakWindow&) = default;
};

/// Weekdays 09:00-17:00.
std::vector<PeakWindow> default_peak_windows();

/// Fixed-length horizon of 15-minute periods starting at local midnight of
/// start_date. Peak flags are precomputed at construction; the object is
/// immutable afterwards.
class PeriodCalendar {
public:
    PeriodCalendar() = default;

    Date start_date() const { return start_; }
    int n_days() const { return n_days_; }
    int n_periods() const { return n_days_ * kPeriodsPerDay; }

    /// 0 = Monday ... 6 = Sunday.
    int weekday_of(int period) const;
    /// Start time of the period in fractional hours, 0 <= h < 24.
    double hour_of(int period) const;
    bool is_peak(int period) const { return peak_[static_cast<std::size_t>(period)]; }
    Date date_of(int period) const;
    /// Days since 1970-01-01 of the period's date.
    long day_number(int period) const;
    /// 1-based day of year.
    int day_of_year(int period) const;
    int peak_count() const;

    const std::vector<PeakWindow>& peak_windows() const { return windows_; }
    const std::vector<Date>& holidays() const { return holidays_; }

    friend bool operator==(const PeriodCalendar& a, const PeriodCalendar& b)
    {
        return a.start_ == b.start_ && a.n_days_ == b.n_days_ && a.peak_ == b.peak_;
    }

private:
    friend PeriodCalendar build_calendar(Date, int, std::vector<PeakWindow>, std::vector<Date>);

    Date start_{};
    int n_days_ = 0;
    std::vector<PeakWindow> windows_;
    std::vector<Date> holidays_;
    std::vector<bool> peak_;
};

/// Throws ConfigError when n_days < 1, the date is invalid, or a window has
/// start_hour >= end_hour or lies outside [0, 24]. Holidays are treated as
/// weekend days for peak purposes.
PeriodCalendar build_calendar(Date start_date, int n_days, std::vector<PeakWindow> peak_windows,
                              std::vector<Date> holidays = {});

/// Parses YYYY-MM-DD; throws ParseError.
Date parse_date(std::string_view text);
std::string format_date(Date d);
long to_day_number(Date d);
Date from_day_number(long days);
/// Days in the calendar month containing d.
int days_in_month(Date d);

} // namespace peakopt::series
