#include "peakopt/features/features.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/io.hpp"
#include "peakopt/series/csv.hpp"

#include <cmath>
#include <numbers>

namespace peakopt::features {

void FeatureSpec::validate() const
{
    if (fourier_day < 0 || fourier_year < 0) {
        throw ConfigError("Fourier orders must be non-negative");
    }
    for (const auto& w : weather_vars) {
        if (w.min_step > w.max_step || w.min_step < -24 || w.max_step > 24) {
            throw ConfigError("weather variable '" + w.name + "' needs -24 <= min_step <= max_step <= 24");
        }
    }
}

std::vector<Column> fourier_features(const PeriodCalendar& cal, int k_day, int k_year)
{
    if (k_day < 0 || k_year < 0) {
        throw ConfigError("Fourier orders must be non-negative");
    }
    const auto n = static_cast<std::size_t>(cal.n_periods());
    std::vector<Column> cols;
    cols.reserve(static_cast<std::size_t>(2 * (k_day + k_year)));
    const auto add_pair = [&](const std::string& stem, int k, auto&& phase) {
        Column s{stem + "_sin" + std::to_string(k), ColumnKind::numeric, std::vector<double>(n), {}};
        Column c{stem + "_cos" + std::to_string(k), ColumnKind::numeric, std::vector<double>(n), {}};
        for (std::size_t p = 0; p < n; ++p) {
            const double angle = 2.0 * std::numbers::pi * k * phase(static_cast<int>(p));
            s.values[p] = std::sin(angle);
            c.values[p] = std::cos(angle);
        }
        cols.push_back(std::move(s));
        cols.push_back(std::move(c));
    };
    for (int k = 1; k <= k_day; ++k) {
        add_pair("day", k, [&](int p) { return cal.hour_of(p) / 24.0; });
    }
    for (int k = 1; k <= k_year; ++k) {
        add_pair("year", k, [&](int p) { return (cal.day_of_year(p) - 1 + cal.hour_of(p) / 24.0) / 365.25; });
    }
    return cols;
}

std::vector<Column> dow_binaries(const PeriodCalendar& cal)
{
    static constexpr const char* kNames[7] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
    const auto n = static_cast<std::size_t>(cal.n_periods());
    std::vector<Column> cols;
    for (const char* name : kNames) {
        cols.push_back(Column{name, ColumnKind::numeric, std::vector<double>(n, 0.0), {}});
    }
    for (std::size_t p = 0; p < n; ++p) {
        cols[static_cast<std::size_t>(cal.weekday_of(static_cast<int>(p)))].values[p] = 1.0;
    }
    return cols;
}

std::vector<Column> lead_lag_expand(const HourlySeries& weather, const PeriodCalendar& cal, int min_step,
                                    int max_step, std::string_view name)
{
    if (min_step > max_step) {
        throw ConfigError("lead/lag range is empty");
    }
    const auto n = static_cast<std::size_t>(cal.n_periods());
    const long offset_hours = (series::to_day_number(cal.start_date()) - series::to_day_number(weather.start)) * 24;
    const long n_hours = static_cast<long>(weather.values.size());
    const auto hour_index = [&](std::size_t p) { return offset_hours + static_cast<long>(p) / 4; };
    if (n > 0 && (hour_index(0) < 0 || hour_index(n - 1) >= n_hours)) {
        throw CoverageError("weather '" + std::string(name) + "' does not cover the calendar horizon");
    }
    std::vector<Column> cols;
    for (int s = min_step; s <= max_step; ++s) {
        Column c;
        c.name = std::string(name) + "@" + (s >= 0 ? "+" : "") + std::to_string(s);
        c.values.assign(n, 0.0);
        c.mask.assign(n, true);
        for (std::size_t p = 0; p < n; ++p) {
            const long h = hour_index(p) + s;
            const bool inside = h >= 0 && h < n_hours;
            const bool seen = inside && (weather.mask.empty() || weather.mask[static_cast<std::size_t>(h)]);
            if (seen) {
                c.values[p] = weather.values[static_cast<std::size_t>(h)];
            } else {
                c.mask[p] = false;
            }
        }
        cols.push_back(std::move(c));
    }
    return cols;
}

FeatureMatrix build_feature_matrix(const PeriodCalendar& cal, const FeatureSpec& spec, const WeatherMap& weather,
                                   int series_code)
{
    spec.validate();
    std::vector<Column> cols = fourier_features(cal, spec.fourier_day, spec.fourier_year);
    if (spec.dow_binaries) {
        auto dow = dow_binaries(cal);
        std::move(dow.begin(), dow.end(), std::back_inserter(cols));
    }
    for (const auto& var : spec.weather_vars) {
        const auto it = weather.find(var.name);
        if (it == weather.end()) {
            throw ConfigError("weather variable '" + var.name + "' not supplied");
        }
        auto ll = lead_lag_expand(it->second, cal, var.min_step, var.max_step, var.name);
        std::move(ll.begin(), ll.end(), std::back_inserter(cols));
    }
    const auto n = static_cast<std::size_t>(cal.n_periods());
    if (spec.include_series_id) {
        cols.push_back(Column{"series_id", ColumnKind::categorical,
                              std::vector<double>(n, static_cast<double>(series_code)), {}});
    }

    FeatureMatrix m;
    m.calendar = cal;
    for (const auto& c : cols) {
        m.schema.names.push_back(c.name);
        m.schema.kinds.push_back(c.kind);
    }
    const std::size_t width = cols.size();
    m.data.resize(n * width);
    m.row_available.assign(n, true);
    for (std::size_t j = 0; j < width; ++j) {
        for (std::size_t p = 0; p < n; ++p) {
            m.data[p * width + j] = cols[j].values[p];
            if (!cols[j].available(p)) {
                m.row_available[p] = false;
            }
        }
    }
    return m;
}

FeatureTable assemble_table(std::span<const NamedSeries> series_set, const FeatureSpec& spec,
                            const WeatherMap& weather)
{
    FeatureTable table;
    bool first = true;
    for (std::size_t code = 0; code < series_set.size(); ++code) {
        const auto& ns = series_set[code];
        const auto m = build_feature_matrix(ns.series.calendar(), spec, weather, static_cast<int>(code));
        if (first) {
            table.schema = m.schema;
            first = false;
        }
        table.series_names.push_back(ns.id);
        const std::size_t width = m.schema.size();
        for (std::size_t p = 0; p < m.n_rows(); ++p) {
            const int period = static_cast<int>(p);
            if (!ns.series.observed(period) || !m.row_available[p]) {
                continue;
            }
            const auto row = m.row(p);
            table.data.insert(table.data.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(width));
            table.target.push_back(ns.series[period]);
            table.refs.push_back(RowRef{static_cast<int>(code), period, ns.series.calendar().day_number(period)});
        }
    }
    if (table.n_rows() == 0) {
        throw AssemblyError("feature table is empty after dropping masked rows");
    }
    return table;
}

FeatureTable restrict_training_window(const FeatureTable& table, Date start, Date end, std::optional<int> series)
{
    const long lo = series::to_day_number(start);
    const long hi = series::to_day_number(end);
    if (lo > hi) {
        throw AssemblyError("training window start is after its end");
    }
    FeatureTable out;
    out.schema = table.schema;
    out.series_names = table.series_names;
    for (std::size_t i = 0; i < table.n_rows(); ++i) {
        const auto& ref = table.refs[i];
        const bool filtered = !series || ref.series == *series;
        if (filtered && (ref.day < lo || ref.day > hi)) {
            continue;
        }
        const auto row = table.row(i);
        out.data.insert(out.data.end(), row.begin(), row.end());
        out.target.push_back(table.target[i]);
        out.refs.push_back(ref);
    }
    if (out.n_rows() == 0) {
        throw AssemblyError("training window contains no rows");
    }
    return out;
}

WeatherMap parse_weather_csv(std::string_view text)
{
    std::vector<std::string> names;
    std::vector<HourlySeries> vars;
    Date start{};
    long expected = 0;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        if (names.empty()) {
            if (fields.size() < 2) {
                throw ParseError("weather header needs timestamp and at least one variable");
            }
            for (std::size_t j = 1; j < fields.size(); ++j) {
                names.emplace_back(fields[j]);
            }
            vars.resize(names.size());
            continue;
        }
        if (fields.size() != names.size() + 1) {
            throw ParseError("weather line " + std::to_string(line_no) + " has the wrong field count");
        }
        const auto ts = series::parse_timestamp(fields[0]);
        if (expected == 0 && vars[0].values.empty()) {
            if (ts.minute_of_day != 0) {
                throw ShapeError("weather must start at local midnight");
            }
            start = ts.date;
        }
        const long minute = (series::to_day_number(ts.date) - series::to_day_number(start)) * 1440 + ts.minute_of_day;
        if (minute != expected) {
            throw ShapeError("weather line " + std::to_string(line_no) + ": rows must be hourly and consecutive");
        }
        expected += 60;
        for (std::size_t j = 0; j < names.size(); ++j) {
            const bool present = !fields[j + 1].empty();
            vars[j].values.push_back(present ? parse_number(fields[j + 1]) : 0.0);
            vars[j].mask.push_back(present);
        }
    }
    WeatherMap out;
    for (std::size_t j = 0; j < names.size(); ++j) {
        vars[j].start = start;
        out.emplace(names[j], std::move(vars[j]));
    }
    return out;
}

} // namespace peakopt::features
