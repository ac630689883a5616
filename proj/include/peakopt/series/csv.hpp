#pragma once

#include "peakopt/series/time_series.hpp"

#include <string>
#include <string_view>

namespace peakopt::series {

struct Timestamp {
    Date date;
    int minute_of_day = 0;
};

/// Accepts YYYY-MM-DDTHH:MM[:SS] or the same with a space separator.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Date date, int minute_of_day);

/// `timestamp,value` with a header line; empty value = missing. The first
/// row must fall on local midnight, rows must be 15 minutes apart and cover
/// whole days. The calendar is rebuilt with the given peak definition.
TimeSeries parse_series_csv(std::string_view text, const std::vector<PeakWindow>& windows,
                            const std::vector<Date>& holidays = {});
std::string format_series_csv(const TimeSeries& s);

} // namespace peakopt::series
