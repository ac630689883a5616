#include "instance_builder.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/opt/generator.hpp"
#include "peakopt/opt/pipeline.hpp"
#include "peakopt/sched/evaluate.hpp"

#include <doctest.h>

using namespace peakopt;
using namespace peakopt::opt;
using namespace testing_support;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<WarmStart> seed_of(const sched::Instance& inst)
{
    return {{solve_mip(build_recurring_mip(inst)).schedule, std::nullopt}};
}

double max_total(const sched::Instance& inst, const sched::Schedule& s, bool with_batteries)
{
    const auto act = sched::activity_load(inst, s);
    const auto bat = sched::battery_power(inst, s);
    double top = -kInf;
    for (std::size_t t = 0; t < act.size(); ++t) {
        top = std::max(top, inst.base_load[static_cast<int>(t)] + act[t] + (with_batteries ? bat[t] : 0.0));
    }
    return top;
}

} // namespace

TEST_CASE("interior point: small problems with known optima")
{
    {
        // min 1/2 x^2 + 1/2 y^2 s.t. x + y = 2
        QuadraticProgram qp;
        const int x = qp.add_variable(0.0, -kInf, kInf, 1.0);
        const int y = qp.add_variable(0.0, -kInf, kInf, 1.0);
        const int r = qp.add_row(2.0);
        qp.add_entry(r, x, 1.0);
        qp.add_entry(r, y, 1.0);
        const auto res = solve_qp(qp);
        REQUIRE(res.status == QpStatus::optimal);
        CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-9));
    }
    {
        // min (x - 3)^2 over [0, 2]: bound active
        QuadraticProgram qp;
        qp.add_variable(-6.0, 0.0, 2.0, 2.0);
        const auto res = solve_qp(qp);
        REQUIRE(res.status == QpStatus::optimal);
        CHECK(res.x[0] == doctest::Approx(2.0).epsilon(1e-9));
    }
    {
        // LP: min -x - y, x + 2y + s = 4, 3x + y + t = 6
        QuadraticProgram qp;
        const int x = qp.add_variable(-1.0, 0.0, 10.0);
        const int y = qp.add_variable(-1.0, 0.0, 10.0);
        const int s = qp.add_variable(0.0, 0.0, kInf);
        const int t = qp.add_variable(0.0, 0.0, kInf);
        const int r0 = qp.add_row(4.0);
        const int r1 = qp.add_row(6.0);
        qp.add_entry(r0, x, 1.0);
        qp.add_entry(r0, y, 2.0);
        qp.add_entry(r0, s, 1.0);
        qp.add_entry(r1, x, 3.0);
        qp.add_entry(r1, y, 1.0);
        qp.add_entry(r1, t, 1.0);
        const auto res = solve_qp(qp);
        REQUIRE(res.status == QpStatus::optimal);
        CHECK(res.objective == doctest::Approx(-2.8).epsilon(1e-8));
    }
}

TEST_CASE("strategy names round trip")
{
    for (const auto s : kStrategies) {
        CHECK(parse_strategy(to_string(s)) == s);
    }
    CHECK_THROWS_AS(parse_strategy("reckless"), ConfigError);
}

TEST_CASE("conservative costs the fixed schedule with idle batteries")
{
    const auto inst = generate_instance(3, generator_options(sched::SizeClass::small), "c");
    const auto warm = seed_of(inst);
    const auto r = solve_miqp(inst, Strategy::conservative, warm);
    REQUIRE(r.solved);
    auto idle = sched::empty_schedule(inst);
    idle.starts = r.schedule.starts;
    CHECK(r.schedule == idle);
    CHECK(r.objective == sched::evaluate_cost(inst, idle, inst.base_load).total);
}

TEST_CASE("zero-capacity batteries leave the warm start cost unchanged")
{
    auto inst = generate_instance(4, generator_options(sched::SizeClass::small), "z");
    for (auto& b : inst.batteries) {
        b.capacity = 0.0;
    }
    MiqpOptions o;
    o.local_rounds = 0;
    const auto warm = seed_of(inst);
    for (const auto s : {Strategy::no_forced_discharge, Strategy::very_liberal}) {
        const auto r = solve_miqp(inst, s, warm, o);
        CHECK(r.objective == sched::evaluate_cost(inst, warm[0].schedule, inst.base_load).total);
    }
}

TEST_CASE("single battery shaving a single-period peak")
{
    // Flat 50 kW with one 90 kW period; free energy, so only the peak term
    // counts. The battery can take at most max_power off the spike.
    auto inst = flat_instance(1, 1, 50.0, 0.0, 0.02);
    std::vector<double> load(96, 50.0);
    load[50] = 90.0;
    set_load(inst, load);
    inst.batteries = {{"b", 100.0, 10.0, 1.0}};
    const auto r = solve_miqp(inst, Strategy::very_liberal, {{sched::empty_schedule(inst), std::nullopt}});
    REQUIRE(r.solved);
    CHECK(r.objective == doctest::Approx(0.02 * 80.0 * 80.0).epsilon(1e-6));
    CHECK(r.schedule.battery_actions.at("b")[50] == doctest::Approx(-10.0).epsilon(1e-6));
    CHECK(sched::validate_schedule(inst, r.schedule).empty());
}

TEST_CASE("strategy constraints hold on returned schedules")
{
    for (std::uint64_t seed = 20; seed < 23; ++seed) {
        const auto inst = generate_instance(seed, generator_options(sched::SizeClass::small), "s");
        const auto warm = seed_of(inst);
        const double base_top = max_total(inst, warm[0].schedule, false);
        for (const auto s : kStrategies) {
            const auto r = solve_miqp(inst, s, warm);
            REQUIRE(r.solved);
            REQUIRE(sched::validate_schedule(inst, r.schedule).empty());
            REQUIRE(satisfies_strategy(inst, r.schedule, s));
            const double eval = sched::evaluate_cost(inst, r.schedule, inst.base_load).total;
            REQUIRE(std::abs(r.objective - eval) <= 1e-6 * (1.0 + std::abs(eval)));
            if (s == Strategy::forced_discharge) {
                for (int t = 0; t < inst.n_periods(); ++t) {
                    if (!inst.calendar.is_peak(t)) {
                        continue;
                    }
                    bool discharging = false;
                    for (const auto& [id, a] : r.schedule.battery_actions) {
                        discharging = discharging || a[static_cast<std::size_t>(t)] < 0.0;
                    }
                    REQUIRE(discharging);
                }
            }
            if (s == Strategy::liberal) {
                REQUIRE(max_total(inst, r.schedule, true) <= max_total(inst, r.schedule, false) + 1e-6);
            }
        }
        CHECK(base_top > 0.0);
    }
}

TEST_CASE("flat load: conservative and no-forced-discharge differ by one arbitrage cycle")
{
    // One Monday, flat 100 kW, no peak charge; energy 20 $/MWh off-peak and
    // 100 $/MWh in peak. A lossless 10 kWh battery fills before 09:00 and
    // empties before 17:00; refilling afterwards earns nothing.
    auto inst = flat_instance(1, 1, 100.0, 0.0, 0.0);
    std::vector<double> price(96);
    for (int t = 0; t < 96; ++t) {
        price[static_cast<std::size_t>(t)] = inst.calendar.is_peak(t) ? 100.0 : 20.0;
    }
    set_prices(inst, price);
    inst.batteries = {{"b", 10.0, 40.0, 1.0}};
    const std::vector<WarmStart> warm{{sched::empty_schedule(inst), std::nullopt}};
    const auto c = solve_miqp(inst, Strategy::conservative, warm);
    const auto n = solve_miqp(inst, Strategy::no_forced_discharge, warm);
    CHECK(c.objective - n.objective == doctest::Approx(10.0 * (100.0 - 20.0) / 1000.0).epsilon(1e-6));
}

TEST_CASE("forced discharge is infeasible when no battery can sustain it")
{
    auto inst = flat_instance(1, 1, 50.0, 40.0, 0.01);
    inst.batteries = {{"b", 0.5, 0.05, 1.0}};
    const auto p = build_battery_miqp(inst, sched::empty_schedule(inst), Strategy::forced_discharge);
    CHECK_FALSE(p.feasible);
    const auto r = solve_miqp(inst, Strategy::forced_discharge, {{sched::empty_schedule(inst), std::nullopt}});
    CHECK_FALSE(r.solved);
    CHECK(r.schedule == sched::empty_schedule(inst));
}

TEST_CASE("warm start with a known objective competes as given")
{
    const auto inst = generate_instance(8, generator_options(sched::SizeClass::small), "w");
    const auto warm = seed_of(inst);
    const auto vl = solve_miqp(inst, Strategy::very_liberal, warm);
    // A fake better objective for a valid very_liberal schedule wins outright.
    const auto r = solve_miqp(inst, Strategy::very_liberal, {{vl.schedule, vl.objective - 1.0}});
    CHECK(r.objective == vl.objective - 1.0);
    // It does not qualify for a strategy it violates.
    if (!satisfies_strategy(inst, vl.schedule, Strategy::conservative)) {
        const auto c = solve_miqp(inst, Strategy::conservative, {{vl.schedule, vl.objective - 1.0}});
        CHECK(c.objective > vl.objective - 1.0);
    }
}

TEST_CASE("pipeline: nested objectives, alignment and branch choice")
{
    for (std::uint64_t seed = 40; seed < 43; ++seed) {
        const auto inst = generate_instance(seed, generator_options(sched::SizeClass::small), "p");
        const auto chain = run_pipeline_chain(inst, Strategy::very_liberal);
        REQUIRE(chain.size() == kStrategies.size());
        for (std::size_t k = 0; k < chain.size(); ++k) {
            const auto& r = chain[k];
            CHECK(r.strategy == kStrategies[k]);
            const auto& other = r.chosen == Branch::recurring_only ? r.with_once_off : r.recurring_only;
            CHECK(r.chosen_result().evaluated_forecast <= other.evaluated_forecast);
            for (const auto* b : {&r.recurring_only, &r.with_once_off}) {
                const double eval = sched::evaluate_cost(inst, b->schedule, inst.base_load).total;
                CHECK(b->evaluated_forecast == eval);
                CHECK(std::abs(b->objective - eval) <= 1e-6 * (1.0 + std::abs(eval)));
            }
            if (k > 0) {
                const auto& prev = chain[k - 1];
                CHECK(r.recurring_only.objective <= prev.recurring_only.objective * (1.0 + 1e-9));
                CHECK(r.with_once_off.objective <= prev.with_once_off.objective * (1.0 + 1e-9));
            }
        }
        CHECK(run_pipeline(inst, Strategy::liberal).recurring_only.objective == chain[3].recurring_only.objective);
    }
}

TEST_CASE("pipeline: no once-off activities keeps the recurring branch")
{
    auto o = generator_options(sched::SizeClass::small);
    o.n_once_off = 0;
    const auto inst = generate_instance(9, o, "r");
    const auto r = run_pipeline(inst, Strategy::no_forced_discharge);
    CHECK(r.chosen == Branch::recurring_only);
}

TEST_CASE("pipeline: valuable once-off activities are taken")
{
    auto o = generator_options(sched::SizeClass::small);
    o.n_once_off = 2;
    const auto inst = generate_instance(10, o, "v");
    const auto r = run_pipeline(inst, Strategy::no_forced_discharge);
    REQUIRE(r.chosen == Branch::with_once_off);
    const double a = sched::evaluate_cost(inst, r.recurring_only.schedule, inst.base_load).total;
    const double b = sched::evaluate_cost(inst, r.with_once_off.schedule, inst.base_load).total;
    CHECK(b < a);
    CHECK(r.with_once_off.schedule.starts.size() > r.recurring_only.schedule.starts.size());
}

TEST_CASE("pipeline: infeasible recurring step carries a certificate")
{
    auto inst = flat_instance(7, 1, 10.0, 10.0, 0.01);
    inst.activities = {recurring("a", 1, 1, 1.0, {40}), recurring("b", 1, 1, 1.0, {40})};
    CHECK_THROWS_AS(run_pipeline(inst, Strategy::conservative), InfeasibleError);
}

TEST_CASE("compare: perfect forecast puts very_liberal at the bottom")
{
    std::vector<sched::Instance> insts;
    std::vector<series::TimeSeries> actuals;
    for (std::uint64_t seed = 60; seed < 62; ++seed) {
        insts.push_back(generate_instance(seed, generator_options(sched::SizeClass::small), "c"));
        actuals.push_back(insts.back().base_load);
    }
    const auto cmp = compare_strategies(insts, actuals);
    REQUIRE(cmp.totals.size() == 5);
    REQUIRE(cmp.results.size() == 2);
    for (const auto& t : cmp.totals) {
        CHECK(cmp.totals.back().evaluated_actual <= t.evaluated_actual * (1.0 + 1e-9));
        CHECK(t.evaluated_actual == doctest::Approx(t.evaluated_forecast).epsilon(1e-12));
    }
}
