#pragma once

#include "peakopt/series/calendar.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace peakopt::series {

/// Per-period numeric trace on a PeriodCalendar. Missing periods are marked
/// in the mask (true = observed); their stored value is meaningless and is
/// never read by the statistics in this module.
class TimeSeries {
public:
    TimeSeries() = default;
    /// Throws ShapeError when values or mask do not match the calendar length.
    TimeSeries(PeriodCalendar calendar, std::vector<double> values, std::vector<bool> mask);
    /// Fully observed series.
    TimeSeries(PeriodCalendar calendar, std::vector<double> values);

    const PeriodCalendar& calendar() const { return calendar_; }
    int size() const { return static_cast<int>(values_.size()); }
    std::span<const double> values() const { return values_; }
    const std::vector<bool>& mask() const { return mask_; }
    double operator[](int p) const { return values_[static_cast<std::size_t>(p)]; }
    bool observed(int p) const { return mask_[static_cast<std::size_t>(p)]; }
    int count_observed() const;
    bool fully_observed() const { return count_observed() == size(); }
    std::vector<double> observed_values() const;

    TimeSeries with_mask(std::vector<bool> mask) const { return {calendar_, values_, std::move(mask)}; }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    PeriodCalendar calendar_;
    std::vector<double> values_;
    std::vector<bool> mask_;
};

struct MaseReport {
    std::vector<std::pair<std::string, double>> per_series;
    double mean = 0.0;
};

MaseReport make_mase_report(std::vector<std::pair<std::string, double>> per_series);

inline constexpr int kDefaultSeason = kPeriodsPerDay;

/// Mean absolute error over periods observed in both actual and forecast,
/// scaled by the in-sample seasonal-naive MAE of training (lag = season,
/// pairs where both ends are observed). Throws ShapeError on mismatched
/// lengths or too-short training, UndefinedMetricError on a zero denominator
/// or no comparable periods.
double mase(const TimeSeries& actual, const TimeSeries& forecast, const TimeSeries& training,
            int season = kDefaultSeason);

/// Span-level form used by mase; the mask spans may be empty for "all observed".
double mase(std::span<const double> actual, std::span<const double> forecast, std::span<const double> training,
            int season);

/// Masks periods whose value is below min_value.
TimeSeries threshold_clean(const TimeSeries& s, double min_value);
/// Masks periods whose value exceeds max_value.
TimeSeries clip_outliers(const TimeSeries& s, double max_value);

/// Largest block length k <= max_factor for which the series is constant on
/// every aligned block [jk, (j+1)k), derived from the positions where the
/// observed value changes. A series with no changes reports 1.
int detect_repeat_factor(const TimeSeries& s, int max_factor);

TimeSeries constant_forecast(const PeriodCalendar& calendar, double level);

/// Median of the observed values (mean of the two middle values for an even
/// count). Throws UndefinedMetricError when nothing is observed.
double median(const TimeSeries& s);
double median(std::vector<double> values);

/// Σ plus − Σ minus, observed where every input is observed. All inputs must
/// share one calendar (ShapeError otherwise).
TimeSeries net_load(std::span<const TimeSeries> plus, std::span<const TimeSeries> minus);

} // namespace peakopt::series
