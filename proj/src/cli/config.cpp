#include "peakopt/cli/config.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <initializer_list>
#include <sstream>

namespace peakopt::cli {

namespace pt = boost::property_tree;

namespace {

class Section {
public:
    Section(std::string name, const pt::ptree* tree, const fs::path& base)
        : name_(std::move(name)), tree_(tree), base_(base)
    {
    }

    void allow(std::initializer_list<std::string_view> keys) const
    {
        if (tree_ == nullptr) {
            return;
        }
        for (const auto& [key, child] : *tree_) {
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                throw ConfigError("[" + name_ + "] unknown key '" + key + "'");
            }
        }
    }

    std::optional<std::string> text(const std::string& key) const
    {
        if (tree_ == nullptr) {
            return std::nullopt;
        }
        const auto it = tree_->find(key);
        if (it == tree_->not_found()) {
            return std::nullopt;
        }
        return std::string(trim(it->second.data()));
    }

    std::string required(const std::string& key) const
    {
        auto v = text(key);
        if (!v || v->empty()) {
            throw ConfigError("[" + name_ + "] missing '" + key + "'");
        }
        return *v;
    }

    template <class F>
    auto convert(const std::string& key, F&& f) const -> std::optional<decltype(f(std::string_view{}))>
    {
        const auto v = text(key);
        if (!v || v->empty()) {
            return std::nullopt;
        }
        try {
            return f(*v);
        } catch (const Error& e) {
            throw ConfigError("[" + name_ + "] " + key + ": " + e.what());
        }
    }

    std::optional<double> number(const std::string& key) const
    {
        return convert(key, [](std::string_view s) { return parse_number(s); });
    }

    std::optional<long> integer(const std::string& key) const
    {
        return convert(key, [](std::string_view s) { return parse_integer(s); });
    }

    std::optional<bool> flag(const std::string& key) const
    {
        return convert(key, [](std::string_view s) {
            if (s == "true" || s == "yes" || s == "1") {
                return true;
            }
            if (s == "false" || s == "no" || s == "0") {
                return false;
            }
            throw ConfigError("expected a boolean");
        });
    }

    std::optional<series::Date> date(const std::string& key) const
    {
        return convert(key, [](std::string_view s) { return series::parse_date(s); });
    }

    fs::path required_path(const std::string& key) const
    {
        fs::path p(required(key));
        return p.is_absolute() ? p : base_ / p;
    }

    std::optional<fs::path> path(const std::string& key) const
    {
        const auto v = text(key);
        if (!v || v->empty()) {
            return std::nullopt;
        }
        fs::path p(*v);
        return p.is_absolute() ? p : base_ / p;
    }

private:
    std::string name_;
    const pt::ptree* tree_;
    fs::path base_;
};

int to_int(long v, std::string_view what)
{
    if (v < 0 || v > 100000000) {
        throw ConfigError(std::string(what) + " out of range");
    }
    return static_cast<int>(v);
}

// "0,1,2,3,4 9 17; 5 10 14" or "none"
std::vector<series::PeakWindow> parse_peak(std::string_view text)
{
    std::vector<series::PeakWindow> out;
    if (trim(text) == "none") {
        return out;
    }
    for (auto part : split(text, ';')) {
        const auto tok = split_whitespace(part);
        if (tok.size() != 3) {
            throw ConfigError("peak window needs 'weekdays start end'");
        }
        series::PeakWindow w;
        for (auto d : split(tok[0], ',')) {
            const long day = parse_integer(d);
            if (day < 0 || day > 6) {
                throw ConfigError("weekday must be 0..6");
            }
            w.weekdays[static_cast<std::size_t>(day)] = true;
        }
        w.start_hour = parse_number(tok[1]);
        w.end_hour = parse_number(tok[2]);
        out.push_back(w);
    }
    return out;
}

// "temp -3 3; solar 0 0"
std::vector<features::WeatherVar> parse_weather_vars(std::string_view text)
{
    std::vector<features::WeatherVar> out;
    for (auto part : split(text, ';')) {
        const auto tok = split_whitespace(part);
        if (tok.empty()) {
            continue;
        }
        if (tok.size() != 3) {
            throw ConfigError("weather variable needs 'name min_step max_step'");
        }
        out.push_back({std::string(tok[0]), static_cast<int>(parse_integer(tok[1])),
                       static_cast<int>(parse_integer(tok[2]))});
    }
    return out;
}

} // namespace

std::uint64_t RunConfig::require_seed() const
{
    if (!seed) {
        throw ConfigError("no seed: set [run] seed or pass --seed");
    }
    return *seed;
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir)
{
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
    }

    RunConfig cfg;
    const auto section = [&](const std::string& name) {
        const auto it = tree.find(name);
        return Section(name, it == tree.not_found() ? nullptr : &it->second, base_dir);
    };

    for (const auto& [name, child] : tree) {
        static const std::vector<std::string_view> fixed{"run", "calendar", "forecast", "optimize", "generate"};
        const bool known = std::find(fixed.begin(), fixed.end(), name) != fixed.end() ||
                           name.starts_with("series.") || name.starts_with("instance.");
        if (!known || !child.data().empty()) {
            throw ConfigError("unknown section [" + name + "]");
        }
    }

    const auto run = section("run");
    run.allow({"phase", "seed", "output", "strategy", "jobs"});
    cfg.phase = run.text("phase").value_or("");
    if (const auto s = run.convert("seed", [](std::string_view v) { return parse_integer(v); })) {
        if (*s < 0) {
            throw ConfigError("[run] seed must be non-negative");
        }
        cfg.seed = static_cast<std::uint64_t>(*s);
    }
    cfg.output = run.path("output").value_or(base_dir / "out");
    if (const auto s = run.convert("strategy", [](std::string_view v) { return opt::parse_strategy(v); })) {
        cfg.strategy = *s;
    }
    cfg.jobs = to_int(run.integer("jobs").value_or(0), "jobs");

    const auto cal = section("calendar");
    cal.allow({"peak", "holidays"});
    if (const auto p = cal.convert("peak", parse_peak)) {
        cfg.peak_windows = *p;
    }
    if (const auto h = cal.text("holidays")) {
        for (auto d : split(*h, ',')) {
            if (!trim(d).empty()) {
                cfg.holidays.push_back(series::parse_date(trim(d)));
            }
        }
    }

    const auto fc = section("forecast");
    fc.allow({"start", "days", "quantile", "season", "fourier_day", "fourier_year", "dow", "series_id", "weather",
              "weather_vars", "trees", "mtry", "min_leaf", "bootstrap"});
    auto& f = cfg.forecast;
    f.days = to_int(fc.integer("days").value_or(0), "days");
    if (f.days > 0) {
        const auto start = fc.date("start");
        if (!start) {
            throw ConfigError("[forecast] start is required when days > 0");
        }
        f.start = *start;
    }
    f.quantile = fc.number("quantile").value_or(0.5);
    if (!(f.quantile > 0.0 && f.quantile < 1.0)) {
        throw ConfigError("[forecast] quantile must lie in (0, 1)");
    }
    f.season = to_int(fc.integer("season").value_or(series::kDefaultSeason), "season");
    f.spec.fourier_day = to_int(fc.integer("fourier_day").value_or(3), "fourier_day");
    f.spec.fourier_year = to_int(fc.integer("fourier_year").value_or(2), "fourier_year");
    f.spec.dow_binaries = fc.flag("dow").value_or(true);
    f.spec.include_series_id = fc.flag("series_id").value_or(true);
    f.weather = fc.path("weather");
    if (const auto w = fc.convert("weather_vars", parse_weather_vars)) {
        f.spec.weather_vars = *w;
    }
    f.spec.validate();
    f.forest.n_trees = to_int(fc.integer("trees").value_or(500), "trees");
    f.forest.mtry = to_int(fc.integer("mtry").value_or(0), "mtry");
    f.forest.min_leaf = to_int(fc.integer("min_leaf").value_or(5), "min_leaf");
    f.forest.bootstrap = fc.flag("bootstrap").value_or(true);

    const auto op = section("optimize");
    op.allow({"node_limit"});
    cfg.node_limit = to_int(op.integer("node_limit").value_or(200000), "node_limit");

    const auto gen = section("generate");
    gen.allow({"count", "size", "fixture"});
    cfg.generate.count = to_int(gen.integer("count").value_or(10), "count");
    if (const auto s = gen.text("size"); s && !s->empty()) {
        if (*s != "small" && *s != "large") {
            throw ConfigError("[generate] size must be small or large");
        }
        cfg.generate.size = *s == "small" ? sched::SizeClass::small : sched::SizeClass::large;
    }
    cfg.generate.fixture = gen.flag("fixture").value_or(false);

    for (const auto& [name, child] : tree) {
        if (name.starts_with("series.")) {
            const auto s = section(name);
            s.allow({"history", "actual", "constant", "min_value", "max_value", "train_start", "train_end"});
            SeriesConfig sc;
            sc.name = name.substr(7);
            sc.history = s.required_path("history");
            sc.actual = s.path("actual");
            sc.constant = s.number("constant");
            sc.min_value = s.number("min_value");
            sc.max_value = s.number("max_value");
            sc.train_start = s.date("train_start");
            sc.train_end = s.date("train_end");
            cfg.series.push_back(std::move(sc));
        } else if (name.starts_with("instance.")) {
            const auto s = section(name);
            s.allow({"file", "load", "actual"});
            InstanceConfig ic;
            ic.name = name.substr(9);
            ic.file = s.required_path("file");
            ic.load = s.path("load");
            ic.actual = s.path("actual");
            cfg.instances.push_back(std::move(ic));
        }
    }
    const auto by_name = [](const auto& a, const auto& b) { return a.name < b.name; };
    std::sort(cfg.series.begin(), cfg.series.end(), by_name);
    std::sort(cfg.instances.begin(), cfg.instances.end(), by_name);
    return cfg;
}

RunConfig load_run_config(const fs::path& path)
{
    if (!fs::is_regular_file(path)) {
        throw ConfigError("config file not found: " + path.string());
    }
    return parse_run_config(read_text_file(path), path.parent_path());
}

namespace {

void need(const fs::path& p)
{
    if (!fs::is_regular_file(p)) {
        throw ConfigError("input file not found: " + p.string());
    }
}

} // namespace

void check_forecast_inputs(const RunConfig& cfg)
{
    if (cfg.forecast.weather) {
        need(*cfg.forecast.weather);
    }
    for (const auto& s : cfg.series) {
        need(s.history);
        if (s.actual) {
            need(*s.actual);
        }
    }
}

void check_instance_inputs(const RunConfig& cfg)
{
    for (const auto& i : cfg.instances) {
        need(i.file);
        if (i.load) {
            need(*i.load);
        }
        if (i.actual) {
            need(*i.actual);
        }
    }
}

} // namespace peakopt::cli
