#include "peakopt/cli/commands.hpp"

#include "peakopt/errors.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <filesystem>
#include <ostream>

namespace peakopt::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"peakopt: load forecasting, activity scheduling and battery dispatch"};
    app.name("peakopt");
    app.require_subcommand(1);

    std::string config_path;
    std::optional<long long> seed;
    std::string strategy;
    std::optional<int> jobs;
    app.add_option("--config", config_path, "run configuration (INI)");
    app.add_option("--seed", seed, "overrides [run] seed");
    app.add_option("--strategy", strategy, "overrides [run] strategy");
    app.add_option("--jobs", jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    auto* forecast = app.add_subcommand("forecast", "fit the forest and forecast every configured series");
    auto* optimize = app.add_subcommand("optimize", "schedule activities and batteries for every instance");
    auto* compare = app.add_subcommand("compare", "compare the five battery strategies against actual load");
    auto* evaluate = app.add_subcommand("evaluate", "validate a schedule and print its cost breakdown");
    auto* generate = app.add_subcommand("gen-instances", "write seeded synthetic instances");

    std::string eval_instance;
    std::string eval_schedule;
    std::string eval_load;
    evaluate->add_option("--instance", eval_instance, "instance document")->required();
    evaluate->add_option("--schedule", eval_schedule, "schedule document")->required();
    evaluate->add_option("--load", eval_load, "load CSV (defaults to the instance base load)");

    std::optional<int> gen_count;
    std::string gen_size;
    std::string gen_output;
    bool gen_fixture = false;
    generate->add_option("--count", gen_count, "number of instances")->check(CLI::NonNegativeNumber);
    generate->add_option("--size", gen_size, "small or large")->check(CLI::IsMember({"small", "large"}));
    generate->add_option("--output", gen_output, "output directory");
    generate->add_flag("--fixture", gen_fixture, "write the noisy-forecast fixture instead");

    for (auto* sub : {forecast, optimize, compare, evaluate, generate}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (evaluate->parsed()) {
            return cmd_evaluate(eval_instance, eval_schedule,
                                eval_load.empty() ? std::nullopt : std::optional<fs::path>(eval_load), out);
        }

        RunConfig cfg;
        if (!config_path.empty()) {
            cfg = load_run_config(config_path);
        } else if (!generate->parsed()) {
            throw ConfigError("--config is required for this command");
        }
        if (seed) {
            if (*seed < 0) {
                throw ConfigError("--seed must be non-negative");
            }
            cfg.seed = static_cast<std::uint64_t>(*seed);
        }
        if (!strategy.empty()) {
            cfg.strategy = opt::parse_strategy(strategy);
        }
        if (jobs) {
            cfg.jobs = *jobs;
        }
        if (cfg.jobs > 0) {
            omp_set_num_threads(cfg.jobs);
        }

        if (forecast->parsed()) {
            return cmd_forecast(cfg, out);
        }
        if (optimize->parsed()) {
            return cmd_optimize(cfg, out);
        }
        if (compare->parsed()) {
            return cmd_compare(cfg, out);
        }
        if (gen_count) {
            cfg.generate.count = *gen_count;
        }
        if (!gen_size.empty()) {
            cfg.generate.size = gen_size == "small" ? sched::SizeClass::small : sched::SizeClass::large;
        }
        if (!gen_output.empty()) {
            cfg.output = gen_output;
        }
        cfg.generate.fixture = cfg.generate.fixture || gen_fixture;
        return cmd_gen_instances(cfg, out);
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return kExitValidation;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

} // namespace peakopt::cli
