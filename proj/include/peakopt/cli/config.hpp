#pragma once

#include "peakopt/features/features.hpp"
#include "peakopt/forest/forest.hpp"
#include "peakopt/opt/battery.hpp"
#include "peakopt/sched/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace peakopt::cli {

namespace fs = std::filesystem;

struct SeriesConfig {
    std::string name;
    fs::path history;
    std::optional<fs::path> actual;
    /// Replaces the model forecast with a flat level.
    std::optional<double> constant;
    std::optional<double> min_value;
    std::optional<double> max_value;
    std::optional<series::Date> train_start;
    std::optional<series::Date> train_end;
};

struct InstanceConfig {
    std::string name;
    fs::path file;
    /// Overrides the instance base load, typically with a forecast CSV.
    std::optional<fs::path> load;
    std::optional<fs::path> actual;
};

struct ForecastConfig {
    series::Date start{};
    int days = 0;
    double quantile = 0.5;
    int season = series::kDefaultSeason;
    features::FeatureSpec spec;
    forest::ForestParams forest;
    std::optional<fs::path> weather;
};

struct GenerateConfig {
    int count = 10;
    sched::SizeClass size = sched::SizeClass::small;
    bool fixture = false;
};

struct RunConfig {
    std::string phase;
    std::optional<std::uint64_t> seed;
    fs::path output = "out";
    opt::Strategy strategy = opt::Strategy::no_forced_discharge;
    int jobs = 0;
    int node_limit = 200000;
    std::vector<series::PeakWindow> peak_windows = series::default_peak_windows();
    std::vector<series::Date> holidays;
    ForecastConfig forecast;
    std::vector<SeriesConfig> series;
    std::vector<InstanceConfig> instances;
    GenerateConfig generate;

    /// Throws ConfigError when no seed was configured or given on the command line.
    std::uint64_t require_seed() const;
};

/// INI text with sections [run], [calendar], [forecast], [optimize],
/// [generate], [series.NAME] and [instance.NAME]. Relative paths are taken
/// against base_dir. Throws ConfigError on unknown keys or bad values.
RunConfig parse_run_config(std::string_view text, const fs::path& base_dir);
RunConfig load_run_config(const fs::path& path);

/// Throw ConfigError when a file read by the forecast stage (series, weather)
/// or the instance stage (instances, loads, actuals) is missing.
void check_forecast_inputs(const RunConfig& cfg);
void check_instance_inputs(const RunConfig& cfg);

/// Purpose tags mixed into the run seed: seed ^ tag.
inline constexpr std::uint64_t kForestTag = 0x666f72657374;   // "forest"
inline constexpr std::uint64_t kGenerateTag = 0x67656e;       // "gen"
inline constexpr std::uint64_t kFixtureTag = 0x66697874757265; // "fixture"

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) { return seed ^ tag; }

} // namespace peakopt::cli
