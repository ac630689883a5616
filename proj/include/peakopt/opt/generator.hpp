#pragma once

#include "peakopt/sched/model.hpp"

#include <cstdint>
#include <string>

namespace peakopt::opt {

struct GeneratorOptions {
    sched::SizeClass size = sched::SizeClass::small;
    std::string start = "2020-10-05";
    int days = 7;
    int n_recurring = 8;
    int n_once_off = 2;
    int rooms = 3;
    int n_precedences = 2;
    int min_starts = 3; // allowed starts per activity
    int max_starts = 5;
    int spread = 8;     // periods either side of the reference start
    int min_duration = 2;
    int max_duration = 8;
    double two_room_share = 0.25; // activities needing two rooms
    double peak_coeff = 0.05;
};

/// Defaults for the two size classes: small has 10 activities, large 40,
/// both two batteries.
GeneratorOptions generator_options(sched::SizeClass size);

/// Seeded synthetic instance. Activities are first placed in a reference
/// schedule that respects rooms; allowed starts are drawn around the
/// reference start and precedences are taken from pairs it orders, so the
/// reference stays feasible. Activity loads are multiples of 0.5 kW.
sched::Instance generate_instance(std::uint64_t seed, const GeneratorOptions& options, std::string name);

struct NoisyFixture {
    sched::Instance instance; // base load holds the forecast
    series::TimeSeries actual;
};

/// Small instance whose forecast misses a one-hour spike: the forecast dips
/// where the realised load peaks and the price drops there too, so a
/// strategy that charges in peak hours is drawn into the spike.
NoisyFixture generate_noisy_fixture(std::uint64_t seed);

} // namespace peakopt::opt
