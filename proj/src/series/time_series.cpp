#include "peakopt/series/time_series.hpp"

#include "peakopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace peakopt::series {

TimeSeries::TimeSeries(PeriodCalendar calendar, std::vector<double> values, std::vector<bool> mask)
    : calendar_(std::move(calendar)), values_(std::move(values)), mask_(std::move(mask))
{
    const auto n = static_cast<std::size_t>(calendar_.n_periods());
    if (values_.size() != n || mask_.size() != n) {
        throw ShapeError("series length " + std::to_string(values_.size()) + " does not match calendar length "
                         + std::to_string(n));
    }
}

TimeSeries::TimeSeries(PeriodCalendar calendar, std::vector<double> values)
    : TimeSeries(calendar, std::move(values), std::vector<bool>(static_cast<std::size_t>(calendar.n_periods()), true))
{
}

int TimeSeries::count_observed() const
{
    return static_cast<int>(std::count(mask_.begin(), mask_.end(), true));
}

std::vector<double> TimeSeries::observed_values() const
{
    std::vector<double> out;
    out.reserve(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (mask_[i]) {
            out.push_back(values_[i]);
        }
    }
    return out;
}

MaseReport make_mase_report(std::vector<std::pair<std::string, double>> per_series)
{
    MaseReport r;
    double sum = 0.0;
    for (const auto& [id, v] : per_series) {
        sum += v;
    }
    r.mean = per_series.empty() ? 0.0 : sum / static_cast<double>(per_series.size());
    r.per_series = std::move(per_series);
    return r;
}

namespace {

double seasonal_naive_mae(std::span<const double> train, const std::vector<bool>* mask, int season)
{
    if (season < 1) {
        throw ShapeError("season must be positive");
    }
    if (static_cast<int>(train.size()) <= season) {
        throw ShapeError("training series must be longer than the season");
    }
    double sum = 0.0;
    long count = 0;
    for (std::size_t t = static_cast<std::size_t>(season); t < train.size(); ++t) {
        const std::size_t lag = t - static_cast<std::size_t>(season);
        if (mask != nullptr && (!(*mask)[t] || !(*mask)[lag])) {
            continue;
        }
        sum += std::abs(train[t] - train[lag]);
        ++count;
    }
    if (count == 0) {
        throw ShapeError("training series has no observed seasonal pairs");
    }
    const double denom = sum / static_cast<double>(count);
    if (!(denom > 0.0)) {
        throw UndefinedMetricError("seasonal-naive denominator is zero (constant training series)");
    }
    return denom;
}

} // namespace

double mase(std::span<const double> actual, std::span<const double> forecast, std::span<const double> training,
            int season)
{
    if (actual.size() != forecast.size()) {
        throw ShapeError("actual and forecast lengths differ");
    }
    if (actual.empty()) {
        throw UndefinedMetricError("no periods to score");
    }
    const double denom = seasonal_naive_mae(training, nullptr, season);
    double num = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        num += std::abs(actual[i] - forecast[i]);
    }
    return num / static_cast<double>(actual.size()) / denom;
}

double mase(const TimeSeries& actual, const TimeSeries& forecast, const TimeSeries& training, int season)
{
    if (actual.size() != forecast.size() || !(actual.calendar() == forecast.calendar())) {
        throw ShapeError("actual and forecast must share a calendar");
    }
    const double denom = seasonal_naive_mae(training.values(), &training.mask(), season);
    double num = 0.0;
    long count = 0;
    for (int p = 0; p < actual.size(); ++p) {
        if (actual.observed(p) && forecast.observed(p)) {
            num += std::abs(actual[p] - forecast[p]);
            ++count;
        }
    }
    if (count == 0) {
        throw UndefinedMetricError("no periods observed in both actual and forecast");
    }
    return num / static_cast<double>(count) / denom;
}

TimeSeries threshold_clean(const TimeSeries& s, double min_value)
{
    std::vector<bool> mask = s.mask();
    for (int p = 0; p < s.size(); ++p) {
        if (s[p] < min_value) {
            mask[static_cast<std::size_t>(p)] = false;
        }
    }
    return s.with_mask(std::move(mask));
}

TimeSeries clip_outliers(const TimeSeries& s, double max_value)
{
    std::vector<bool> mask = s.mask();
    for (int p = 0; p < s.size(); ++p) {
        if (s[p] > max_value) {
            mask[static_cast<std::size_t>(p)] = false;
        }
    }
    return s.with_mask(std::move(mask));
}

int detect_repeat_factor(const TimeSeries& s, int max_factor)
{
    if (max_factor < 1) {
        return 1;
    }
    int g = 0;
    for (int p = 1; p < s.size(); ++p) {
        if (s.observed(p) && s.observed(p - 1) && s[p] != s[p - 1]) {
            g = std::gcd(g, p);
            if (g == 1) {
                return 1;
            }
        }
    }
    if (g == 0) {
        return 1;
    }
    for (int k = std::min(g, max_factor); k > 1; --k) {
        if (g % k == 0) {
            return k;
        }
    }
    return 1;
}

TimeSeries constant_forecast(const PeriodCalendar& calendar, double level)
{
    return TimeSeries(calendar, std::vector<double>(static_cast<std::size_t>(calendar.n_periods()), level));
}

double median(std::vector<double> values)
{
    if (values.empty()) {
        throw UndefinedMetricError("median of an empty set");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double median(const TimeSeries& s)
{
    return median(s.observed_values());
}

TimeSeries net_load(std::span<const TimeSeries> plus, std::span<const TimeSeries> minus)
{
    if (plus.empty() && minus.empty()) {
        throw ShapeError("net load needs at least one series");
    }
    const TimeSeries& ref = plus.empty() ? minus.front() : plus.front();
    const auto n = static_cast<std::size_t>(ref.size());
    std::vector<double> values(n, 0.0);
    std::vector<bool> mask(n, true);
    const auto accumulate = [&](std::span<const TimeSeries> group, double sign) {
        for (const auto& s : group) {
            if (!(s.calendar() == ref.calendar())) {
                throw ShapeError("net load inputs must share a calendar");
            }
            for (std::size_t i = 0; i < n; ++i) {
                values[i] += sign * s.values()[i];
                mask[i] = mask[i] && s.mask()[i];
            }
        }
    };
    accumulate(plus, 1.0);
    accumulate(minus, -1.0);
    return TimeSeries(ref.calendar(), std::move(values), std::move(mask));
}

} // namespace peakopt::series
