#pragma once

#include <cstdint>

namespace peakopt::forest {

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream keyed by (seed, stream id). The i-th draw is a pure function of
/// (seed, stream, i), so per-tree streams do not depend on build order.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL)))
    {
    }

    std::uint64_t next() { return splitmix64(key_ ^ splitmix64(counter_++)); }

    /// Uniform integer in [0, bound), bound > 0, by rejection.
    std::uint64_t below(std::uint64_t bound)
    {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t r = next();
        while (r >= limit) {
            r = next();
        }
        return r % bound;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace peakopt::forest
