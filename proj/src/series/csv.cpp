#include "peakopt/series/csv.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/io.hpp"

#include <cstdio>

namespace peakopt::series {

Timestamp parse_timestamp(std::string_view text)
{
    text = trim(text);
    if (text.size() < 16 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':') {
        throw ParseError("malformed timestamp '" + std::string(text) + "'");
    }
    Timestamp ts;
    ts.date = parse_date(text.substr(0, 10));
    const long hh = parse_integer(text.substr(11, 2));
    const long mm = parse_integer(text.substr(14, 2));
    if (hh < 0 || hh > 23 || mm < 0 || mm > 59) {
        throw ParseError("malformed timestamp '" + std::string(text) + "'");
    }
    ts.minute_of_day = static_cast<int>(hh * 60 + mm);
    return ts;
}

std::string format_timestamp(Date date, int minute_of_day)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:00", format_date(date).c_str(), minute_of_day / 60,
                  minute_of_day % 60);
    return buf;
}

TimeSeries parse_series_csv(std::string_view text, const std::vector<PeakWindow>& windows,
                            const std::vector<Date>& holidays)
{
    std::vector<double> values;
    std::vector<bool> mask;
    Date start{};
    long expected_minute = 0;
    bool header = true;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        if (header) {
            header = false;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 2) {
            throw ParseError("line " + std::to_string(line_no) + ": expected timestamp,value");
        }
        const Timestamp ts = parse_timestamp(fields[0]);
        if (values.empty()) {
            if (ts.minute_of_day != 0) {
                throw ShapeError("series must start at local midnight");
            }
            start = ts.date;
        }
        const long minute = (to_day_number(ts.date) - to_day_number(start)) * 1440 + ts.minute_of_day;
        if (minute != expected_minute) {
            throw ShapeError("line " + std::to_string(line_no) + ": timestamps must be consecutive 15-minute steps");
        }
        expected_minute += 15;
        if (fields[1].empty()) {
            values.push_back(0.0);
            mask.push_back(false);
        } else {
            values.push_back(parse_number(fields[1]));
            mask.push_back(true);
        }
    }
    if (values.empty()) {
        throw ShapeError("series file has no rows");
    }
    if (values.size() % kPeriodsPerDay != 0) {
        throw ShapeError("series must cover whole days");
    }
    auto cal = build_calendar(start, static_cast<int>(values.size() / kPeriodsPerDay), windows, holidays);
    return TimeSeries(std::move(cal), std::move(values), std::move(mask));
}

std::string format_series_csv(const TimeSeries& s)
{
    std::string out = "timestamp,value\n";
    out.reserve(static_cast<std::size_t>(s.size()) * 32);
    const auto& cal = s.calendar();
    for (int p = 0; p < s.size(); ++p) {
        out += format_timestamp(cal.date_of(p), (p % kPeriodsPerDay) * 15);
        out += ',';
        if (s.observed(p)) {
            out += format_number(s[p]);
        }
        out += '\n';
    }
    return out;
}

} // namespace peakopt::series
