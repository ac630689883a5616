// Serial reference vs OpenMP kernel timings. Prints one line per kernel and
// checks that both paths produce identical results.

#include "peakopt/features/features.hpp"
#include "peakopt/forest/forest.hpp"
#include "peakopt/forest/rng.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

using namespace peakopt;

namespace {

template <class F>
double seconds(F&& f, int repeats)
{
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void report(const char* name, double serial, double parallel, bool same)
{
    std::printf("%-16s serial %8.3f s  parallel %8.3f s  speedup %5.2fx  %s\n", name, serial, parallel,
                serial / parallel, same ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv)
{
    const int days = argc > 1 ? std::atoi(argv[1]) : 56;
    const int trees = argc > 2 ? std::atoi(argv[2]) : 100;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;
    std::printf("threads %d, %d days of history, %d trees, best of %d\n", omp_get_max_threads(), days, trees,
                repeats);

    const auto cal = series::build_calendar(series::parse_date("2020-01-06"), days, series::default_peak_windows());
    forest::CounterRng rng(1, 0x62656e6368);
    std::vector<double> y(static_cast<std::size_t>(cal.n_periods()));
    for (int p = 0; p < cal.n_periods(); ++p) {
        const double day = 2.0 * std::numbers::pi * cal.hour_of(p) / 24.0;
        y[static_cast<std::size_t>(p)] = 40.0 + 10.0 * std::sin(day) + (cal.weekday_of(p) < 5 ? 6.0 : 0.0) +
                                         4.0 * rng.uniform();
    }
    const std::vector<features::NamedSeries> named{{"s", series::TimeSeries(cal, y)}};
    const features::FeatureSpec spec;
    const auto table = features::assemble_table(named, spec, {});

    forest::ForestParams params;
    params.n_trees = trees;
    forest::ForestModel a;
    forest::ForestModel b;
    const double fit_serial = seconds([&] { a = forest::fit_serial(table, params); }, repeats);
    const double fit_parallel = seconds([&] { b = forest::fit(table, params); }, repeats);
    report("fit", fit_serial, fit_parallel, a == b);

    const auto m = features::build_feature_matrix(cal, spec, {});
    series::TimeSeries ps;
    series::TimeSeries pp;
    const double pred_serial = seconds([&] { ps = forest::predict_series_serial(a, m, 0.5); }, repeats);
    const double pred_parallel = seconds([&] { pp = forest::predict_series(a, m, 0.5); }, repeats);
    report("predict_series", pred_serial, pred_parallel, ps == pp);
    return a == b && ps == pp ? 0 : 1;
}
