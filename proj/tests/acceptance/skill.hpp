#pragma once

// Synthetic forecasting experiment: a known daily Fourier shape, a weekday
// offset and a weather term driven by an AR(1) hourly temperature anomaly,
// plus Gaussian noise. The forest sees the same weather at forecast time.

#include "peakopt/features/features.hpp"
#include "peakopt/forest/forest.hpp"
#include "peakopt/forest/rng.hpp"
#include "peakopt/series/time_series.hpp"

#include <cmath>
#include <numbers>

namespace acceptance {

using namespace peakopt;

struct SkillResult {
    double forest_mase = 0.0;
    double naive_mase = 0.0;
};

inline double gaussian(forest::CounterRng& rng)
{
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline SkillResult forecast_skill(std::uint64_t seed, int train_days = 56, int test_days = 14, int trees = 60)
{
    constexpr int kSeason = series::kPeriodsPerDay;
    const auto start = series::parse_date("2020-08-03");
    const int days = train_days + test_days;
    const auto full = series::build_calendar(start, days, series::default_peak_windows());
    forest::CounterRng rng(seed, 0x736b696c6c);

    // Hourly weather with one spare day either side.
    features::HourlySeries temp;
    temp.start = series::from_day_number(series::to_day_number(start) - 1);
    const int hours = (days + 2) * 24;
    double anomaly = 0.0;
    for (int h = 0; h < hours; ++h) {
        anomaly = 0.8 * anomaly + 2.0 * gaussian(rng);
        temp.values.push_back(anomaly);
    }
    features::WeatherMap weather{{"temp", temp}};

    std::vector<double> y(static_cast<std::size_t>(full.n_periods()));
    for (int p = 0; p < full.n_periods(); ++p) {
        const double h = full.hour_of(p);
        const double day = 2.0 * std::numbers::pi * h / 24.0;
        const double weekday = full.weekday_of(p) < 5 ? 8.0 : 0.0;
        const double w = temp.values[static_cast<std::size_t>(24 + p / 4)];
        y[static_cast<std::size_t>(p)] =
            50.0 + 10.0 * std::sin(day) + 4.0 * std::cos(2.0 * day) + weekday + 2.0 * w + 1.5 * gaussian(rng);
    }

    const int n_train = train_days * kSeason;
    const auto train_cal = series::build_calendar(start, train_days, series::default_peak_windows());
    const auto test_cal = series::build_calendar(
        series::from_day_number(series::to_day_number(start) + train_days), test_days, series::default_peak_windows());
    const series::TimeSeries train(train_cal, {y.begin(), y.begin() + n_train});
    const series::TimeSeries actual(test_cal, {y.begin() + n_train, y.end()});

    features::FeatureSpec spec;
    spec.weather_vars = {{"temp", 0, 0}};
    const std::vector<features::NamedSeries> named{{"s", train}};
    const auto table = features::assemble_table(named, spec, weather);
    forest::ForestParams params;
    params.n_trees = trees;
    params.seed = seed;
    const auto model = forest::fit(table, params);
    const auto forecast = forest::predict_series(model, features::build_feature_matrix(test_cal, spec, weather), 0.5);

    // Seasonal naive on the test period: each value predicted by the one a
    // season earlier.
    std::vector<double> naive(y.begin() + n_train - kSeason, y.end() - kSeason);
    const series::TimeSeries naive_forecast(test_cal, naive);
    return {series::mase(actual, forecast, train, kSeason), series::mase(actual, naive_forecast, train, kSeason)};
}

} // namespace acceptance
