#include "peakopt/opt/generator.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/forest/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace peakopt::opt {

using sched::Activity;
using sched::ActivityKind;
using sched::Instance;

namespace {

constexpr std::uint64_t kInstanceStream = 0x696e7374;
constexpr std::uint64_t kNoiseStream = 0x6e6f6973;

int uniform_int(forest::CounterRng& rng, int lo, int hi)
{
    return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

double round_half(double x)
{
    return std::round(2.0 * x) / 2.0;
}

struct Placement {
    int start = 0;
    int end = 0;
};

class Builder {
public:
    Builder(std::uint64_t seed, const GeneratorOptions& o, std::string name)
        : o_(o), rng_(seed, kInstanceStream)
    {
        inst_.name = std::move(name);
        inst_.calendar = series::build_calendar(series::parse_date(o.start), o.days, series::default_peak_windows());
        inst_.n_rooms_total = o.rooms;
        inst_.peak_charge_coeff = o.peak_coeff;
        inst_.size_class = o.size;
        used_.assign(static_cast<std::size_t>(inst_.n_periods()), 0);
    }

    Instance build()
    {
        for (int i = 0; i < o_.n_recurring; ++i) {
            add_activity("r" + std::to_string(i), ActivityKind::recurring);
        }
        for (int i = 0; i < o_.n_once_off; ++i) {
            add_activity("o" + std::to_string(i), ActivityKind::once_off);
        }
        add_precedences();
        add_series();
        add_batteries();
        return std::move(inst_);
    }

private:
    bool fits(const Activity& a, int s) const
    {
        for (const auto& iv : sched::occurrences(inst_, a, s)) {
            for (int t = iv.begin; t < iv.end; ++t) {
                if (used_[static_cast<std::size_t>(t)] + a.n_rooms > inst_.n_rooms_total) {
                    return false;
                }
            }
        }
        return true;
    }

    int reference_start(const Activity& a)
    {
        const int window = inst_.recurrence_window();
        const int days = a.recurring() ? window / series::kPeriodsPerDay : inst_.calendar.n_days();
        for (int attempt = 0; attempt < 500; ++attempt) {
            const int day = uniform_int(rng_, 0, std::max(days, 1) - 1);
            int s = 0;
            if (a.recurring()) {
                s = day * series::kPeriodsPerDay + uniform_int(rng_, 28, 72);
            } else {
                // Inside a weekday's peak window so the value can be realised.
                s = day * series::kPeriodsPerDay + uniform_int(rng_, 36, 68 - a.duration);
                if (!sched::runs_in_peak(inst_, a, s)) {
                    continue;
                }
            }
            if (sched::start_admissible(inst_, a, s) && fits(a, s)) {
                return s;
            }
        }
        throw ConfigError("generator could not place " + a.id + "; add rooms or days");
    }

    void add_activity(std::string id, ActivityKind kind)
    {
        Activity a;
        a.id = std::move(id);
        a.kind = kind;
        a.duration = uniform_int(rng_, o_.min_duration, o_.max_duration);
        a.n_rooms = rng_.uniform() < o_.two_room_share && o_.rooms > 1 ? 2 : 1;
        a.load_per_room = 0.5 * uniform_int(rng_, 1, 16);
        if (kind == ActivityKind::once_off) {
            a.value = 10.0 * uniform_int(rng_, 5, 40);
            a.penalty = 10.0 * uniform_int(rng_, 5, 30);
        }
        const int ref = reference_start(a);
        std::vector<int> starts{ref};
        const int want = uniform_int(rng_, o_.min_starts, o_.max_starts);
        for (int attempt = 0; attempt < 50 && static_cast<int>(starts.size()) < want; ++attempt) {
            const int s = ref + uniform_int(rng_, -o_.spread, o_.spread);
            if (std::find(starts.begin(), starts.end(), s) == starts.end() && sched::start_admissible(inst_, a, s)) {
                starts.push_back(s);
            }
        }
        std::sort(starts.begin(), starts.end());
        a.allowed_starts = std::move(starts);
        for (const auto& iv : sched::occurrences(inst_, a, ref)) {
            for (int t = iv.begin; t < iv.end; ++t) {
                used_[static_cast<std::size_t>(t)] += a.n_rooms;
            }
        }
        refs_.push_back({ref, ref + a.duration});
        inst_.activities.push_back(std::move(a));
    }

    void add_precedences()
    {
        std::vector<std::pair<int, int>> pairs;
        const auto n = static_cast<int>(inst_.activities.size());
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const auto& a = inst_.activities[static_cast<std::size_t>(i)];
                const auto& b = inst_.activities[static_cast<std::size_t>(j)];
                if (i != j && a.kind == b.kind
                    && refs_[static_cast<std::size_t>(i)].end <= refs_[static_cast<std::size_t>(j)].start) {
                    pairs.emplace_back(i, j);
                }
            }
        }
        for (int k = 0; k < o_.n_precedences && !pairs.empty(); ++k) {
            const auto pick = static_cast<std::size_t>(rng_.below(pairs.size()));
            const auto [i, j] = pairs[pick];
            pairs.erase(pairs.begin() + static_cast<std::ptrdiff_t>(pick));
            inst_.precedences.push_back({inst_.activities[static_cast<std::size_t>(i)].id,
                                         inst_.activities[static_cast<std::size_t>(j)].id});
        }
    }

    void add_series()
    {
        const int n = inst_.n_periods();
        std::vector<double> load(static_cast<std::size_t>(n));
        std::vector<double> price(static_cast<std::size_t>(n));
        const double level = 40.0 + 10.0 * rng_.uniform();
        for (int t = 0; t < n; ++t) {
            const double hour = inst_.calendar.hour_of(t);
            const bool weekend = inst_.calendar.weekday_of(t) >= 5;
            const double day = std::max(0.0, std::sin(std::numbers::pi * (hour - 6.0) / 14.0));
            const double bump = (weekend ? 20.0 : 50.0) * day;
            load[static_cast<std::size_t>(t)] = round_half(level + bump + 10.0 * (rng_.uniform() - 0.5));
            const double tariff = 35.0 + 10.0 * std::sin(2.0 * std::numbers::pi * hour / 24.0) + 5.0 * rng_.uniform();
            price[static_cast<std::size_t>(t)] = round_half(tariff + (inst_.calendar.is_peak(t) ? 50.0 : 0.0));
        }
        inst_.base_load = series::TimeSeries(inst_.calendar, std::move(load));
        inst_.prices = series::TimeSeries(inst_.calendar, std::move(price));
    }

    void add_batteries()
    {
        static constexpr double kEfficiency[] = {0.85, 0.9, 0.95};
        for (int b = 0; b < 2; ++b) {
            sched::Battery bat;
            bat.id = "b" + std::to_string(b);
            bat.capacity = 5.0 * uniform_int(rng_, 8, 24);
            bat.max_power = uniform_int(rng_, 10, 30);
            bat.efficiency = kEfficiency[rng_.below(3)];
            inst_.batteries.push_back(bat);
        }
    }

    GeneratorOptions o_;
    forest::CounterRng rng_;
    Instance inst_;
    std::vector<int> used_;
    std::vector<Placement> refs_;
};

} // namespace

GeneratorOptions generator_options(sched::SizeClass size)
{
    GeneratorOptions o;
    o.size = size;
    if (size == sched::SizeClass::large) {
        o.n_recurring = 32;
        o.n_once_off = 8;
        o.rooms = 8;
        o.n_precedences = 8;
    }
    return o;
}

Instance generate_instance(std::uint64_t seed, const GeneratorOptions& options, std::string name)
{
    if (options.n_recurring < 0 || options.n_once_off < 0 || options.rooms < 1 || options.min_starts < 1
        || options.max_starts < options.min_starts || options.min_duration < 1
        || options.max_duration < options.min_duration || options.max_duration > 32) {
        throw ConfigError("invalid generator options");
    }
    return Builder(seed, options, std::move(name)).build();
}

NoisyFixture generate_noisy_fixture(std::uint64_t seed)
{
    auto options = generator_options(sched::SizeClass::small);
    Instance inst = generate_instance(seed, options, "noisy");
    forest::CounterRng rng(seed, kNoiseStream);

    const auto n = static_cast<std::size_t>(inst.n_periods());
    std::vector<double> actual(n);
    std::vector<double> forecast(n);
    std::vector<double> price(n);
    for (std::size_t t = 0; t < n; ++t) {
        actual[t] = inst.base_load[static_cast<int>(t)];
        forecast[t] = round_half(actual[t] + 8.0 * (rng.uniform() - 0.5));
        price[t] = inst.prices[static_cast<int>(t)];
    }
    // Wednesday 14:00-15:00.
    const double top = *std::max_element(actual.begin(), actual.end());
    const std::size_t spike = 2 * series::kPeriodsPerDay + 56;
    for (std::size_t t = spike; t < spike + 4; ++t) {
        actual[t] = top + 40.0;
        forecast[t] = round_half(forecast[t] - 40.0);
        price[t] = 1.0;
    }
    inst.base_load = series::TimeSeries(inst.calendar, std::move(forecast));
    inst.prices = series::TimeSeries(inst.calendar, std::move(price));
    series::TimeSeries realised(inst.calendar, std::move(actual));
    return {std::move(inst), std::move(realised)};
}

} // namespace peakopt::opt
