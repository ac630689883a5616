#pragma once

#include "peakopt/series/time_series.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace peakopt::features {

using series::Date;
using series::PeriodCalendar;
using series::TimeSeries;

enum class ColumnKind { numeric, categorical };

/// One regressor over the periods of a calendar. An empty mask means every
/// value is available.
struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<double> values;
    std::vector<bool> mask;

    bool available(std::size_t i) const { return mask.empty() || mask[i]; }
};

/// Hourly trace starting at local midnight of `start`.
struct HourlySeries {
    Date start{};
    std::vector<double> values;
    std::vector<bool> mask;
};

struct WeatherVar {
    std::string name;
    int min_step = 0;
    int max_step = 0;
};

struct FeatureSpec {
    int fourier_day = 3;
    int fourier_year = 2;
    bool dow_binaries = true;
    std::vector<WeatherVar> weather_vars;
    bool include_series_id = false;

    /// Throws ConfigError for negative orders or steps outside ±24 hours.
    void validate() const;
};

struct FeatureSchema {
    std::vector<std::string> names;
    std::vector<ColumnKind> kinds;

    std::size_t size() const { return names.size(); }
    friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

/// sin/cos pairs of hour-of-day (period 24 h) and fractional day-of-year
/// (period 365.25 d) for harmonics 1..K; 2(K_day + K_year) columns.
std::vector<Column> fourier_features(const PeriodCalendar& cal, int k_day, int k_year);

/// One-hot weekday columns mon..sun.
std::vector<Column> dow_binaries(const PeriodCalendar& cal);

/// Hourly weather broadcast onto the four periods of each hour, one column
/// per step in [min_step, max_step]; column s at period p reads the weather
/// hour containing p shifted by s hours. Lookups falling outside the weather
/// record are masked. Throws CoverageError when the record does not cover
/// every hour of the calendar itself.
std::vector<Column> lead_lag_expand(const HourlySeries& weather, const PeriodCalendar& cal, int min_step,
                                    int max_step, std::string_view name = "w");

/// All regressors for one calendar, row-major, with per-row availability.
struct FeatureMatrix {
    PeriodCalendar calendar;
    FeatureSchema schema;
    std::vector<double> data;
    std::vector<bool> row_available;

    std::size_t n_rows() const { return row_available.size(); }
    std::span<const double> row(std::size_t i) const
    {
        return {data.data() + i * schema.size(), schema.size()};
    }
};

using WeatherMap = std::map<std::string, HourlySeries, std::less<>>;

/// Throws ConfigError if a weather variable named in spec is absent.
FeatureMatrix build_feature_matrix(const PeriodCalendar& cal, const FeatureSpec& spec, const WeatherMap& weather,
                                   int series_code = 0);

struct RowRef {
    int series = 0;
    int period = 0;
    long day = 0;

    friend bool operator==(const RowRef&, const RowRef&) = default;
};

struct FeatureTable {
    FeatureSchema schema;
    std::vector<double> data;
    std::vector<double> target;
    std::vector<RowRef> refs;
    std::vector<std::string> series_names;

    std::size_t n_rows() const { return target.size(); }
    std::size_t n_cols() const { return schema.size(); }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * n_cols(), n_cols()}; }
    double at(std::size_t row, std::size_t col) const { return data[row * n_cols() + col]; }
};

struct NamedSeries {
    std::string id;
    TimeSeries series;
};

/// Concatenates rows of every series in input order; series i gets code i in
/// the series_id column. Rows with a missing target or unavailable feature
/// are dropped. Throws AssemblyError when nothing remains.
FeatureTable assemble_table(std::span<const NamedSeries> series_set, const FeatureSpec& spec,
                            const WeatherMap& weather);

/// Keeps rows dated within [start, end]; when `series` is given only that
/// series' rows are filtered. Throws AssemblyError on start > end or an empty
/// result.
FeatureTable restrict_training_window(const FeatureTable& table, Date start, Date end,
                                      std::optional<int> series = std::nullopt);

/// `timestamp,var1,var2,...` at hourly spacing starting at midnight; empty
/// fields are missing.
WeatherMap parse_weather_csv(std::string_view text);

} // namespace peakopt::features
