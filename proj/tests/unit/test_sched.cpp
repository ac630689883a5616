#include "instance_builder.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/io.hpp"
#include "peakopt/sched/evaluate.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace peakopt;
using namespace peakopt::sched;
using namespace testing_support;

namespace {

std::string minimal_document(const std::string& extra = {})
{
    std::string doc = "peakopt-instance v1\n"
                      "horizon 2020-10-05 1\n"
                      "rooms 1\n"
                      "peak_coeff 0.005\n"
                      "battery b0 10 5 0.9\n"
                      "activity a recurring 4 1 10 0 0\n"
                      + extra;
    doc += "load inline";
    for (int i = 0; i < 96; ++i) {
        doc += " 1";
    }
    doc += "\nprice inline";
    for (int i = 0; i < 96; ++i) {
        doc += " 50";
    }
    return doc + "\n";
}

} // namespace

TEST_CASE("parse a minimal instance")
{
    const auto inst = parse_instance(minimal_document());
    CHECK(inst.activities.size() == 1);
    CHECK(inst.n_rooms_total == 1);
    CHECK(inst.batteries.size() == 1);
    CHECK(inst.n_periods() == 96);
    CHECK(inst.calendar.peak_count() == 32);
    CHECK(inst.peak_charge_coeff == 0.005);
    CHECK(inst.prices[10] == 50.0);
}

TEST_CASE("instance validation errors")
{
    const std::string two = "activity b recurring 2 1 1 0 0\n";
    CHECK_THROWS_AS(parse_instance(minimal_document(two + "prec a b\nprec b a\n")), ValidationError);
    CHECK_THROWS_AS(parse_instance(minimal_document("prec a zz\n")), ReferenceError);
    CHECK_THROWS_AS(parse_instance(minimal_document("activity o once_off 2 1 1 5 5\nprec a o\n")), ValidationError);
    CHECK_THROWS_AS(parse_instance(minimal_document("activity a recurring 1 1 1 0 0\n")), ValidationError);
    CHECK_THROWS_AS(parse_instance(minimal_document("activity r recurring 1 1 1 3 0\n")), ValidationError);
    CHECK_THROWS_AS(parse_instance(minimal_document("battery b1 0 5 0.9\n")), ValidationError);
    CHECK_THROWS_AS(parse_instance(minimal_document("starts a 94\n")), ValidationError);
    CHECK_THROWS_AS(parse_instance(minimal_document("bogus 1\n")), ParseError);
    CHECK_THROWS_AS(parse_instance("peakopt-instance v2\n"), ParseError);

    auto doc = minimal_document();
    doc.replace(doc.find("horizon 2020-10-05 1"), 20, "horizon 2020-10-05 2");
    CHECK_THROWS_AS(parse_instance(doc), ShapeError);
}

TEST_CASE("instance series may live in csv files next to the document")
{
    const auto dir = std::filesystem::temp_directory_path() / "peakopt_sched_files";
    std::filesystem::create_directories(dir);
    std::string csv = "timestamp,value\n";
    for (int p = 0; p < 96; ++p) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "2020-10-05T%02d:%02d:00,%d\n", p / 4, (p % 4) * 15, p);
        csv += buf;
    }
    write_file_atomic(dir / "load.csv", csv);
    write_file_atomic(dir / "price.csv", csv);
    const auto inst = parse_instance("peakopt-instance v1\nhorizon 2020-10-05 1\nrooms 2\nload file load.csv\n"
                                     "price file price.csv\n",
                                     dir);
    CHECK(inst.base_load[95] == 95.0);
    CHECK_THROWS_AS(parse_instance("peakopt-instance v1\nhorizon 2020-10-06 1\nrooms 2\nload file load.csv\n"
                                   "price file price.csv\n",
                                   dir),
                    ShapeError);
}

TEST_CASE("a ten-activity small instance round trips through its document")
{
    std::mt19937 rng(4);
    auto inst = flat_instance(7, 5, 80.0, 45.5, 0.01);
    inst.size_class = SizeClass::small;
    inst.batteries = {{"b0", 120, 40, 0.9}, {"b1", 60.5, 25, 0.95}};
    for (int i = 0; i < 8; ++i) {
        inst.activities.push_back(recurring("r" + std::to_string(i), 1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 2),
                                            0.5 * static_cast<double>(rng() % 20), {36 + i, 40 + i, 132 + i}));
    }
    inst.activities.push_back(once_off("o0", 4, 1, 7.5, 300, 450));
    inst.activities.push_back(once_off("o1", 2, 2, 3, 120, 130, {40, 41}));
    inst.precedences = {{"r0", "r3"}, {"r1", "r2"}, {"o0", "o1"}};
    std::vector<double> load(672);
    for (std::size_t t = 0; t < load.size(); ++t) {
        load[t] = 50.0 + std::sin(0.1 * static_cast<double>(t)) / 3.0;
    }
    set_load(inst, load);

    const auto text = serialize_instance(inst);
    const auto back = parse_instance(text);
    CHECK(back == inst);
    CHECK(serialize_instance(back) == text);
}

TEST_CASE("empty instance with an empty schedule is valid and free")
{
    const auto inst = flat_instance(1, 1);
    const auto s = empty_schedule(inst);
    CHECK(validate_schedule(inst, s).empty());
    const auto c = evaluate_cost(inst, s, inst.base_load);
    CHECK(c.total == 0.0);
}

TEST_CASE("overlapping single-room activities clash")
{
    auto inst = flat_instance(1, 1);
    inst.activities = {recurring("a", 4, 1, 1.0), recurring("b", 4, 1, 1.0)};
    auto s = empty_schedule(inst);
    s.starts = {{"a", 40}, {"b", 42}};
    const auto v = validate_schedule(inst, s);
    REQUIRE(v.size() == 2);
    CHECK(v[0].kind == ViolationKind::room_limit);
    CHECK(v[0].period == 42);
    CHECK(v[1].period == 43);
    s.starts["b"] = 44;
    CHECK(validate_schedule(inst, s).empty());
}

TEST_CASE("state of charge overflow is reported at the first overflowing period")
{
    auto inst = flat_instance(1, 1);
    inst.batteries = {{"b", 10.0, 8.0, 0.81}};
    auto s = empty_schedule(inst);
    // Each full-power period stores 8 * 0.25 * 0.9 = 1.8 kWh: 9.0 after five,
    // 10.8 after six.
    for (int t = 0; t < 6; ++t) {
        s.battery_actions["b"][static_cast<std::size_t>(t)] = 8.0;
    }
    const auto v = validate_schedule(inst, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::state_of_charge);
    CHECK(v[0].period == 5);

    s.battery_actions["b"][5] = 0.0;
    s.battery_actions["b"][6] = -8.0; // removes 2.22 kWh of the 9.0
    CHECK(validate_schedule(inst, s).empty());
    const auto soc = state_of_charge(inst.batteries[0], s.battery_actions["b"]);
    CHECK(soc[6] == doctest::Approx(9.0 - 2.0 / 0.9));
    s.battery_actions["b"][7] = -8.1;
    const auto v2 = validate_schedule(inst, s);
    REQUIRE(v2.size() == 1);
    CHECK(v2[0].kind == ViolationKind::power_bound);
}

TEST_CASE("discharging an empty battery is a state of charge violation")
{
    auto inst = flat_instance(1, 1);
    inst.batteries = {{"b", 10.0, 8.0, 1.0}};
    auto s = empty_schedule(inst);
    s.battery_actions["b"][3] = -1.0;
    const auto v = validate_schedule(inst, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].period == 3);
}

TEST_CASE("precedence, coverage and start checks")
{
    auto inst = flat_instance(14, 3);
    inst.activities = {recurring("a", 4, 1, 1.0), recurring("b", 4, 1, 1.0), once_off("o", 2, 1, 1, 10, 20),
                       once_off("p", 2, 1, 1, 10, 20)};
    inst.precedences = {{"a", "b"}, {"o", "p"}};
    auto s = empty_schedule(inst);
    s.starts = {{"a", 40}, {"b", 44}};
    CHECK(validate_schedule(inst, s).empty());

    s.starts["b"] = 43;
    auto v = validate_schedule(inst, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::precedence);

    s.starts = {{"a", 40}};
    v = validate_schedule(inst, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::missing_recurring);

    // Recurring starts are first-week periods.
    s.starts = {{"a", 40}, {"b", 672 + 44}};
    v = validate_schedule(inst, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::bad_start);

    s.starts = {{"a", 40}, {"b", 44}, {"p", 900}};
    v = validate_schedule(inst, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ViolationKind::precedence);
    s.starts["o"] = 897;
    CHECK(validate_schedule(inst, s).empty());
    s.starts["zz"] = 1;
    CHECK(validate_schedule(inst, s).front().kind == ViolationKind::unknown_activity);
}

TEST_CASE("weekly recurrence occupies rooms every week")
{
    auto inst = flat_instance(14, 1);
    inst.activities = {recurring("a", 4, 1, 2.0), once_off("o", 4, 1, 1, 10, 20)};
    auto s = empty_schedule(inst);
    s.starts = {{"a", 40}, {"o", 672 + 42}};
    const auto v = validate_schedule(inst, s);
    REQUIRE(v.size() == 2);
    CHECK(v[0].period == 672 + 42);
    const auto load = activity_load(inst, s);
    CHECK(load[40] == 2.0);
    CHECK(load[672 + 40] == 2.0);
}

TEST_CASE("flat-load cost arithmetic")
{
    const auto inst = flat_instance(1, 1, 100.0, 50.0, 0.005);
    const auto c = evaluate_cost(inst, empty_schedule(inst), inst.base_load);
    CHECK(c.energy == doctest::Approx(120.0).epsilon(1e-14));
    CHECK(c.peak == doctest::Approx(50.0).epsilon(1e-14));
    CHECK(c.total == doctest::Approx(170.0).epsilon(1e-14));
}

TEST_CASE("once-off value in peak and penalty outside it")
{
    auto inst = flat_instance(1, 2, 10.0, 0.0, 0.0);
    inst.activities = {once_off("o", 4, 1, 0.0, 100, 250), once_off("p", 4, 1, 0.0, 40, 60)};
    auto s = empty_schedule(inst);
    s.starts = {{"o", 36}, {"p", 66}};
    const auto c = evaluate_cost(inst, s, inst.base_load);
    CHECK(c.once_off_net == -100.0 + 60.0);
}

TEST_CASE("evaluate_cost contract errors")
{
    auto inst = flat_instance(1, 1, 1.0, 1.0, 0.0);
    inst.activities = {recurring("a", 4, 1, 2.0)};
    CHECK_THROWS_AS(evaluate_cost(inst, empty_schedule(inst), inst.base_load), ContractError);
    auto s = empty_schedule(inst);
    s.starts["a"] = 0;
    auto gappy = inst.base_load.with_mask(std::vector<bool>(96, false));
    CHECK_THROWS_AS(evaluate_cost(inst, s, gappy), ContractError);
}

TEST_CASE("cost properties: peak monotonicity, energy linearity, discharge at the peak")
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(10.0, 100.0);
    for (int trial = 0; trial < 30; ++trial) {
        auto inst = flat_instance(1, 1, 0.0, 0.0, 0.01 + 0.01 * trial);
        inst.batteries = {{"b", 1000.0, 50.0, 1.0}};
        std::vector<double> load(96);
        std::vector<double> price(96);
        for (int t = 0; t < 96; ++t) {
            load[static_cast<std::size_t>(t)] = u(rng);
            price[static_cast<std::size_t>(t)] = u(rng);
        }
        const auto peak_at = static_cast<std::size_t>(std::max_element(load.begin(), load.end()) - load.begin());
        set_load(inst, load);
        set_prices(inst, price);
        const auto s = empty_schedule(inst);
        const auto base = evaluate_cost(inst, s, inst.base_load);

        auto higher = load;
        higher[peak_at] += 1.0;
        REQUIRE(evaluate_cost(inst, s, series::TimeSeries(inst.calendar, higher)).total > base.total);

        const double alpha = 0.5 + trial * 0.1;
        auto scaled = load;
        for (auto& x : scaled) {
            x *= alpha;
        }
        REQUIRE(evaluate_cost(inst, s, series::TimeSeries(inst.calendar, scaled)).energy
                == doctest::Approx(alpha * base.energy).epsilon(1e-12));

        // Charge d in period 0, discharge it at the peak while the peak stays the maximum.
        if (peak_at > 0) {
            auto sorted = load;
            std::sort(sorted.begin(), sorted.end());
            const double d = std::min(10.0, 0.5 * (sorted[95] - sorted[94]));
            const double m = base.max_load;
            if (load[0] + d < m - d) {
                auto with = s;
                with.battery_actions["b"][0] = d;
                with.battery_actions["b"][peak_at] = -d;
                const auto c = evaluate_cost(inst, with, inst.base_load);
                REQUIRE(base.peak - c.peak
                        == doctest::Approx(inst.peak_charge_coeff * (m * m - (m - d) * (m - d))).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("schedule documents")
{
    Schedule empty;
    CHECK(serialize_schedule(empty) == "peakopt-schedule v1\nperiods 0\n");
    CHECK(parse_schedule(serialize_schedule(empty)) == empty);

    auto inst = flat_instance(1, 2);
    inst.batteries = {{"b0", 10, 5, 1}, {"b1", 10, 5, 1}};
    auto s = empty_schedule(inst);
    s.starts = {{"a", 4}, {"c", 17}};
    s.battery_actions["b0"][3] = 0.1 + 0.2;
    s.battery_actions["b0"][9] = -1.0 / 3.0;
    const auto text = serialize_schedule(s);
    CHECK(parse_schedule(text) == s);
    auto t = s;
    t.starts["c"] = 18;
    CHECK(serialize_schedule(t) != text);
    CHECK_THROWS_AS(parse_schedule("peakopt-schedule v1\nperiods 4\nbatt b0 1 2\n"), ParseError);
}

TEST_CASE("schedule documents round trip under random content")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int trial = 0; trial < 25; ++trial) {
        Schedule s;
        s.n_periods = 96;
        for (int i = 0; i < 5; ++i) {
            s.starts["a" + std::to_string(i)] = static_cast<int>(rng() % 90);
        }
        for (int b = 0; b < 2; ++b) {
            auto& v = s.battery_actions["b" + std::to_string(b)];
            v.assign(96, 0.0);
            for (int k = 0; k < 20; ++k) {
                v[rng() % 96] = u(rng);
            }
        }
        REQUIRE(parse_schedule(serialize_schedule(s)) == s);
    }
}
