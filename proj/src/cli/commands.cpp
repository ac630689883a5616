#include "peakopt/cli/commands.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/io.hpp"
#include "peakopt/opt/generator.hpp"
#include "peakopt/opt/pipeline.hpp"
#include "peakopt/sched/evaluate.hpp"
#include "peakopt/series/csv.hpp"

#include <cstdio>
#include <exception>
#include <ostream>
#include <sstream>

namespace peakopt::cli {

using series::TimeSeries;

namespace {

series::TimeSeries read_series(const fs::path& path, const std::vector<series::PeakWindow>& windows,
                               const std::vector<series::Date>& holidays)
{
    return series::parse_series_csv(read_text_file(path), windows, holidays);
}

// Reads a series that must lie on the instance horizon without gaps.
TimeSeries read_instance_series(const sched::Instance& inst, const fs::path& path)
{
    auto s = read_series(path, inst.calendar.peak_windows(), inst.calendar.holidays());
    if (!(s.calendar() == inst.calendar)) {
        throw ShapeError(path.string() + " does not match the horizon of instance " + inst.name);
    }
    if (!s.fully_observed()) {
        throw ShapeError(path.string() + " has missing periods");
    }
    return s;
}

struct LoadedInstance {
    sched::Instance instance;
    std::optional<TimeSeries> actual;
};

std::vector<LoadedInstance> load_instances(const RunConfig& cfg)
{
    if (cfg.instances.empty()) {
        throw ConfigError("no [instance.NAME] sections configured");
    }
    std::vector<LoadedInstance> out;
    for (const auto& ic : cfg.instances) {
        LoadedInstance li;
        li.instance = sched::parse_instance(read_text_file(ic.file), ic.file.parent_path());
        li.instance.name = ic.name;
        if (ic.load) {
            li.instance.base_load = read_instance_series(li.instance, *ic.load);
        }
        if (ic.actual) {
            li.actual = read_instance_series(li.instance, *ic.actual);
        }
        out.push_back(std::move(li));
    }
    return out;
}

opt::PipelineOptions pipeline_options(const RunConfig& cfg)
{
    opt::PipelineOptions o;
    o.mip.node_limit = cfg.node_limit;
    return o;
}

std::string fixed2(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

const char* header_only = "timestamp,value\n";

} // namespace

int cmd_forecast(const RunConfig& cfg, std::ostream& out)
{
    check_forecast_inputs(cfg);
    const auto seed = cfg.require_seed();
    if (cfg.series.empty()) {
        throw ConfigError("no [series.NAME] sections configured");
    }
    const auto& fc = cfg.forecast;
    const fs::path dir = cfg.output / "forecast";

    if (fc.days == 0) {
        for (const auto& s : cfg.series) {
            write_file_atomic(dir / (s.name + ".csv"), header_only);
        }
        out << "forecast horizon is empty; wrote " << cfg.series.size() << " empty series\n";
        return kExitOk;
    }

    features::WeatherMap weather;
    if (fc.weather) {
        weather = features::parse_weather_csv(read_text_file(*fc.weather));
    }

    std::vector<TimeSeries> history;
    std::vector<features::NamedSeries> fitted;
    std::vector<int> code(cfg.series.size(), -1);
    for (std::size_t i = 0; i < cfg.series.size(); ++i) {
        const auto& sc = cfg.series[i];
        auto s = read_series(sc.history, cfg.peak_windows, cfg.holidays);
        if (sc.min_value) {
            s = series::threshold_clean(s, *sc.min_value);
        }
        if (sc.max_value) {
            s = series::clip_outliers(s, *sc.max_value);
        }
        if (!sc.constant) {
            code[i] = static_cast<int>(fitted.size());
            fitted.push_back({sc.name, s});
        }
        history.push_back(std::move(s));
    }

    forest::ForestModel model;
    if (!fitted.empty()) {
        auto table = features::assemble_table(fitted, fc.spec, weather);
        for (std::size_t i = 0; i < cfg.series.size(); ++i) {
            const auto& sc = cfg.series[i];
            if (code[i] < 0 || (!sc.train_start && !sc.train_end)) {
                continue;
            }
            const auto& cal = history[i].calendar();
            table = features::restrict_training_window(table, sc.train_start.value_or(cal.start_date()),
                                                       sc.train_end.value_or(cal.date_of(cal.n_periods() - 1)),
                                                       code[i]);
        }
        auto params = fc.forest;
        params.seed = derive_seed(seed, kForestTag);
        model = forest::fit(table, params);
        out << "fitted " << model.n_trees() << " trees on " << table.n_rows() << " rows from " << fitted.size()
            << " series\n";
    }

    const auto horizon = series::build_calendar(fc.start, fc.days, cfg.peak_windows, cfg.holidays);
    std::vector<std::pair<std::string, double>> scores;
    for (std::size_t i = 0; i < cfg.series.size(); ++i) {
        const auto& sc = cfg.series[i];
        TimeSeries f;
        if (sc.constant) {
            f = series::constant_forecast(horizon, *sc.constant);
        } else {
            const auto m = features::build_feature_matrix(horizon, fc.spec, weather, code[i]);
            f = forest::predict_series(model, m, fc.quantile);
        }
        write_file_atomic(dir / (sc.name + ".csv"), series::format_series_csv(f));
        if (sc.actual) {
            const auto actual = read_series(*sc.actual, cfg.peak_windows, cfg.holidays);
            scores.emplace_back(sc.name, series::mase(actual, f, history[i], fc.season));
        }
    }
    out << "wrote " << cfg.series.size() << " forecasts to " << dir.string() << '\n';

    if (!scores.empty()) {
        const auto report = series::make_mase_report(scores);
        std::ostringstream csv;
        csv << "series,mase\n";
        for (const auto& [name, v] : report.per_series) {
            csv << name << ',' << format_number(v) << '\n';
            out << "mase " << name << ' ' << format_number(v) << '\n';
        }
        csv << "mean," << format_number(report.mean) << '\n';
        out << "mase mean " << format_number(report.mean) << '\n';
        write_file_atomic(cfg.output / "mase.csv", csv.str());
    }
    return kExitOk;
}

int cmd_optimize(const RunConfig& cfg, std::ostream& out)
{
    check_instance_inputs(cfg);
    const auto loaded = load_instances(cfg);
    const auto options = pipeline_options(cfg);
    const int n = static_cast<int>(loaded.size());

    std::vector<std::optional<opt::PipelineResult>> results(loaded.size());
    std::vector<std::string> certificates(loaded.size());
    std::vector<std::exception_ptr> errors(loaded.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            results[k] = opt::run_pipeline(loaded[k].instance, cfg.strategy, loaded[k].actual, options);
        } catch (const InfeasibleError& e) {
            certificates[k] = e.what();
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    int status = kExitOk;
    std::ostringstream csv;
    csv << "instance,strategy,status,branch,objective,evaluated_forecast,evaluated_actual\n";
    for (std::size_t k = 0; k < loaded.size(); ++k) {
        const auto& inst = loaded[k].instance;
        const auto strategy = opt::to_string(cfg.strategy);
        if (!results[k]) {
            status = kExitValidation;
            csv << inst.name << ',' << strategy << ",infeasible,,,,\n";
            out << inst.name << ": infeasible: " << certificates[k] << '\n';
            continue;
        }
        const auto& r = *results[k];
        const auto& b = r.chosen_result();
        const auto violations = sched::validate_schedule(inst, b.schedule);
        if (!violations.empty()) {
            status = kExitValidation;
            out << inst.name << ": emitted schedule has " << violations.size() << " violations\n";
        }
        write_file_atomic(cfg.output / "schedules" / (inst.name + ".txt"), sched::serialize_schedule(b.schedule));
        csv << inst.name << ',' << strategy << ',' << (b.solved ? "solved" : "fallback") << ','
            << opt::to_string(r.chosen) << ',' << format_number(b.objective) << ','
            << format_number(b.evaluated_forecast) << ',' << optional_number(r.evaluated_actual) << '\n';
        out << inst.name << ": " << opt::to_string(r.chosen) << " objective " << fixed2(b.objective) << '\n';
    }
    write_file_atomic(cfg.output / "results.csv", csv.str());
    return status;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out)
{
    check_instance_inputs(cfg);
    auto loaded = load_instances(cfg);
    std::vector<sched::Instance> instances;
    std::vector<TimeSeries> actuals;
    for (auto& li : loaded) {
        if (!li.actual) {
            throw ConfigError("instance " + li.instance.name + " has no actual load to compare against");
        }
        instances.push_back(std::move(li.instance));
        actuals.push_back(std::move(*li.actual));
    }
    const auto cmp = opt::compare_strategies(instances, actuals, pipeline_options(cfg));

    std::ostringstream totals;
    totals << "strategy,objective,evaluated_forecast,evaluated_actual\n";
    out << "strategy               objective   forecast cost    actual cost\n";
    for (const auto& t : cmp.totals) {
        totals << opt::to_string(t.strategy) << ',' << format_number(t.objective) << ','
               << format_number(t.evaluated_forecast) << ',' << format_number(t.evaluated_actual) << '\n';
        char line[160];
        std::snprintf(line, sizeof line, "%-20s %12s %14s %14s\n", opt::to_string(t.strategy).c_str(),
                      fixed2(t.objective).c_str(), fixed2(t.evaluated_forecast).c_str(),
                      fixed2(t.evaluated_actual).c_str());
        out << line;
    }
    std::ostringstream detail;
    detail << "instance,strategy,branch,objective,evaluated_forecast,evaluated_actual\n";
    for (std::size_t i = 0; i < cmp.results.size(); ++i) {
        for (const auto& r : cmp.results[i]) {
            const auto& b = r.chosen_result();
            detail << instances[i].name << ',' << opt::to_string(r.strategy) << ',' << opt::to_string(r.chosen)
                   << ',' << format_number(b.objective) << ',' << format_number(b.evaluated_forecast) << ','
                   << optional_number(r.evaluated_actual) << '\n';
        }
    }
    write_file_atomic(cfg.output / "comparison.csv", totals.str());
    write_file_atomic(cfg.output / "comparison_instances.csv", detail.str());
    return kExitOk;
}

int cmd_evaluate(const fs::path& instance, const fs::path& schedule, const std::optional<fs::path>& load,
                 std::ostream& out)
{
    const auto inst = sched::parse_instance(read_text_file(instance), instance.parent_path());
    const auto s = sched::parse_schedule(read_text_file(schedule));
    const auto violations = sched::validate_schedule(inst, s);
    if (!violations.empty()) {
        out << "invalid schedule: " << violations.size() << " violations\n";
        for (const auto& v : violations) {
            out << sched::to_string(v.kind) << ' ' << v.subject << ' ' << v.period << ' ' << v.message << '\n';
        }
        return kExitValidation;
    }
    const auto l = load ? read_instance_series(inst, *load) : inst.base_load;
    const auto c = sched::evaluate_cost(inst, s, l);
    out << "energy " << format_number(c.energy) << '\n'
        << "peak " << format_number(c.peak) << '\n'
        << "once_off_net " << format_number(c.once_off_net) << '\n'
        << "total " << format_number(c.total) << '\n'
        << "max_load " << format_number(c.max_load) << '\n';
    return kExitOk;
}

int cmd_gen_instances(const RunConfig& cfg, std::ostream& out)
{
    const auto seed = cfg.require_seed();
    if (cfg.generate.fixture) {
        const auto f = opt::generate_noisy_fixture(derive_seed(seed, kFixtureTag));
        write_file_atomic(cfg.output / "fixture.txt", sched::serialize_instance(f.instance));
        write_file_atomic(cfg.output / "fixture_actual.csv", series::format_series_csv(f.actual));
        out << "wrote noisy-forecast fixture to " << cfg.output.string() << '\n';
        return kExitOk;
    }
    const auto opts = opt::generator_options(cfg.generate.size);
    const std::string prefix = cfg.generate.size == sched::SizeClass::small ? "small-" : "large-";
    for (int i = 0; i < cfg.generate.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%s%03d", prefix.c_str(), i);
        const auto inst = opt::generate_instance(derive_seed(seed, kGenerateTag) + static_cast<std::uint64_t>(i),
                                                 opts, name);
        write_file_atomic(cfg.output / (std::string(name) + ".txt"), sched::serialize_instance(inst));
    }
    out << "wrote " << cfg.generate.count << " instances to " << cfg.output.string() << '\n';
    return kExitOk;
}

} // namespace peakopt::cli
