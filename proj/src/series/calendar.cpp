#include "peakopt/series/calendar.hpp"

#include "peakopt/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace peakopt::series {

namespace chr = std::chrono;

std::vector<PeakWindow> default_peak_windows()
{
    PeakWindow w;
    w.weekdays = {true, true, true, true, true, false, false};
    w.start_hour = 9.0;
    w.end_hour = 17.0;
    return {w};
}

long to_day_number(Date d)
{
    return chr::sys_days{d}.time_since_epoch().count();
}

Date from_day_number(long days)
{
    return Date{chr::sys_days{chr::days{days}}};
}

int days_in_month(Date d)
{
    const chr::year_month_day_last last{d.year(), chr::month_day_last{d.month()}};
    return static_cast<int>(static_cast<unsigned>(last.day()));
}

Date parse_date(std::string_view text)
{
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    const auto bad = [&] { return ParseError("malformed date '" + std::string(text) + "'"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw bad();
    }
    const char* b = text.data();
    if (std::from_chars(b, b + 4, y).ec != std::errc{} || std::from_chars(b + 5, b + 7, m).ec != std::errc{}
        || std::from_chars(b + 8, b + 10, d).ec != std::errc{}) {
        throw bad();
    }
    Date out{chr::year{y}, chr::month{m}, chr::day{d}};
    if (!out.ok()) {
        throw bad();
    }
    return out;
}

std::string format_date(Date d)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

int PeriodCalendar::weekday_of(int period) const
{
    const chr::weekday wd{chr::sys_days{start_} + chr::days{period / kPeriodsPerDay}};
    return static_cast<int>(wd.iso_encoding()) - 1;
}

double PeriodCalendar::hour_of(int period) const
{
    return static_cast<double>(period % kPeriodsPerDay) * kPeriodHours;
}

Date PeriodCalendar::date_of(int period) const
{
    return Date{chr::sys_days{start_} + chr::days{period / kPeriodsPerDay}};
}

long PeriodCalendar::day_number(int period) const
{
    return to_day_number(start_) + period / kPeriodsPerDay;
}

int PeriodCalendar::day_of_year(int period) const
{
    const Date d = date_of(period);
    const Date jan1{d.year(), chr::January, chr::day{1}};
    return static_cast<int>(to_day_number(d) - to_day_number(jan1)) + 1;
}

int PeriodCalendar::peak_count() const
{
    return static_cast<int>(std::count(peak_.begin(), peak_.end(), true));
}

PeriodCalendar build_calendar(Date start_date, int n_days, std::vector<PeakWindow> peak_windows,
                              std::vector<Date> holidays)
{
    if (!start_date.ok()) {
        throw ConfigError("invalid calendar start date");
    }
    if (n_days < 1) {
        throw ConfigError("calendar needs at least one day");
    }
    for (const auto& w : peak_windows) {
        if (!(w.start_hour < w.end_hour) || w.start_hour < 0.0 || w.end_hour > 24.0) {
            throw ConfigError("peak window must satisfy 0 <= start < end <= 24");
        }
    }
    std::sort(holidays.begin(), holidays.end());
    holidays.erase(std::unique(holidays.begin(), holidays.end()), holidays.end());

    PeriodCalendar cal;
    cal.start_ = start_date;
    cal.n_days_ = n_days;
    cal.windows_ = std::move(peak_windows);
    cal.holidays_ = std::move(holidays);
    cal.peak_.assign(static_cast<std::size_t>(cal.n_periods()), false);
    for (int day = 0; day < n_days; ++day) {
        const int first = day * kPeriodsPerDay;
        if (std::binary_search(cal.holidays_.begin(), cal.holidays_.end(), cal.date_of(first))) {
            continue;
        }
        const int wd = cal.weekday_of(first);
        for (int k = 0; k < kPeriodsPerDay; ++k) {
            const double h = cal.hour_of(first + k);
            for (const auto& w : cal.windows_) {
                if (w.weekdays[static_cast<std::size_t>(wd)] && h >= w.start_hour && h < w.end_hour) {
                    cal.peak_[static_cast<std::size_t>(first + k)] = true;
                    break;
                }
            }
        }
    }
    return cal;
}

} // namespace peakopt::series
