#include "oracles.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/forest/forest.hpp"
#include "peakopt/forest/greedy_search.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace peakopt;
using namespace peakopt::forest;
using features::FeatureTable;

namespace {

FeatureTable numeric_table(const std::vector<std::vector<double>>& x, const std::vector<double>& y)
{
    FeatureTable t;
    for (std::size_t j = 0; j < x[0].size(); ++j) {
        t.schema.names.push_back("x" + std::to_string(j));
        t.schema.kinds.push_back(ColumnKind::numeric);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        t.data.insert(t.data.end(), x[i].begin(), x[i].end());
        t.target.push_back(y[i]);
        t.refs.push_back({0, static_cast<int>(i), 0});
    }
    t.series_names = {"s"};
    return t;
}

FeatureTable random_table(std::mt19937_64& rng, std::size_t rows, std::size_t cols)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> x(rows, std::vector<double>(cols));
    std::vector<double> y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        for (auto& v : x[i]) {
            v = u(rng);
        }
        y[i] = 3.0 * x[i][0] + (cols > 1 ? x[i][1] * x[i][1] : 0.0) + 0.3 * u(rng);
    }
    return numeric_table(x, y);
}

ForestModel leaf_model(std::vector<std::vector<double>> leaves)
{
    ForestModel m;
    m.schema.names = {"x"};
    m.schema.kinds = {ColumnKind::numeric};
    m.params.n_trees = static_cast<int>(leaves.size());
    for (auto& l : leaves) {
        Tree t;
        t.nodes.push_back(TreeNode{-1, 0.0, -1, -1, 0, static_cast<int>(l.size())});
        t.leaf_values = l;
        m.trees.push_back(t);
    }
    return m;
}

} // namespace

TEST_CASE("quantiles of hand-built forests")
{
    const std::vector<double> row{0.0};
    CHECK(predict_quantile(leaf_model({{1, 2, 3, 4, 5}}), row, 0.5) == 3.0);
    CHECK(predict_quantile(leaf_model({{0, 0}, {10, 10}}), row, 0.5) == 0.0);
    CHECK(predict_quantile(leaf_model({{0, 0}, {10, 10}}), row, 0.51) == 10.0);
    // Per-tree normalisation: a big leaf does not outvote a small one.
    CHECK(predict_quantile(leaf_model({{0, 0, 0, 0, 0, 0}, {10}}), row, 0.6) == 10.0);
}

TEST_CASE("prediction argument checks")
{
    const auto m = leaf_model({{1, 2}});
    CHECK_THROWS_AS(predict_quantile(m, std::vector<double>{1.0, 2.0}, 0.5), PredictionError);
    CHECK_THROWS_AS(predict_quantile(m, std::vector<double>{1.0}, 0.0), PredictionError);
    CHECK_THROWS_AS(predict_quantile(m, std::vector<double>{1.0}, 1.0), PredictionError);
}

TEST_CASE("fit argument checks")
{
    FeatureTable empty;
    empty.schema.names = {"x"};
    empty.schema.kinds = {ColumnKind::numeric};
    CHECK_THROWS_AS(fit(empty, ForestParams{}), FitError);
    std::mt19937_64 rng(1);
    const auto t = random_table(rng, 20, 2);
    ForestParams p;
    p.mtry = 3;
    CHECK_THROWS_AS(fit(t, p), FitError);
    p.mtry = 1;
    p.n_trees = 0;
    CHECK_THROWS_AS(fit(t, p), FitError);
}

TEST_CASE("constant target grows single-leaf trees")
{
    std::vector<std::vector<double>> x;
    for (int i = 0; i < 50; ++i) {
        x.push_back({static_cast<double>(i), static_cast<double>(i % 7)});
    }
    const auto t = numeric_table(x, std::vector<double>(50, 4.5));
    ForestParams p;
    p.n_trees = 20;
    p.min_leaf = 1;
    const auto m = fit(t, p);
    for (const auto& tree : m.trees) {
        REQUIRE(tree.nodes.size() == 1);
    }
    for (double q : {0.05, 0.5, 0.95}) {
        CHECK(predict_quantile(m, t.row(7), q) == 4.5);
    }
}

TEST_CASE("a single unbootstrapped tree reproduces an exact one-feature target")
{
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) {
        const double v = static_cast<double>(rng() % 1000) / 10.0;
        x.push_back({v});
        y.push_back(v);
    }
    const auto t = numeric_table(x, y);
    ForestParams p;
    p.n_trees = 1;
    p.min_leaf = 1;
    p.mtry = 1;
    p.bootstrap = false;
    const auto m = fit(t, p);
    for (std::size_t i = 0; i < y.size(); ++i) {
        REQUIRE(predict_quantile(m, t.row(i), 0.5) == y[i]);
    }
}

TEST_CASE("fits are deterministic and schedule independent")
{
    std::mt19937_64 rng(3);
    const auto t = random_table(rng, 300, 4);
    ForestParams p;
    p.n_trees = 16;
    p.seed = 99;
    const auto a = fit(t, p);
    const auto b = fit(t, p);
    const auto c = fit_serial(t, p);
    CHECK(a == b);
    CHECK(a == c);
    p.seed = 100;
    CHECK_FALSE(fit(t, p) == a);
}

TEST_CASE("single tree matches brute-force CART leaf quantiles")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> uq(0.01, 0.99);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t rows = 20 + rng() % 181;
        const std::size_t cols = 1 + rng() % 3;
        const auto t = random_table(rng, rows, cols);
        ForestParams p;
        p.n_trees = 1;
        p.bootstrap = false;
        p.mtry = static_cast<int>(cols);
        p.min_leaf = 1 + static_cast<int>(rng() % 6);
        const auto m = fit(t, p);

        std::vector<std::vector<double>> x(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            x[i].assign(t.row(i).begin(), t.row(i).end());
        }
        const oracle::BruteForceCart cart(x, t.target, static_cast<std::size_t>(p.min_leaf));
        REQUIRE(m.trees[0].leaf_count() == static_cast<int>(cart.leaves().size()));
        for (std::size_t i = 0; i < rows; ++i) {
            const double q = uq(rng);
            const auto& leaf = cart.leaves()[static_cast<std::size_t>(cart.leaf_of()[i])];
            REQUIRE(predict_quantile(m, t.row(i), q) == oracle::lower_quantile(leaf, q));
        }
    }
}

TEST_CASE("quantile predictions are monotone in q and within the target range")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto t = random_table(rng, 200, 3);
    ForestParams p;
    p.n_trees = 25;
    p.min_leaf = 3;
    const auto m = fit(t, p);
    const auto [lo, hi] = std::minmax_element(t.target.begin(), t.target.end());
    for (int probe = 0; probe < 300; ++probe) {
        std::vector<double> row{2 * u(rng) - 1, 2 * u(rng) - 1, 2 * u(rng) - 1};
        double q1 = 0.001 + 0.998 * u(rng);
        double q2 = 0.001 + 0.998 * u(rng);
        if (q1 > q2) {
            std::swap(q1, q2);
        }
        const double a = predict_quantile(m, row, q1);
        const double b = predict_quantile(m, row, q2);
        REQUIRE(a <= b);
        REQUIRE(a >= *lo);
        REQUIRE(b <= *hi);
    }
}

TEST_CASE("model text round trip is bit exact")
{
    std::mt19937_64 rng(6);
    auto t = random_table(rng, 150, 3);
    t.schema.kinds[2] = ColumnKind::categorical;
    for (std::size_t i = 0; i < t.n_rows(); ++i) {
        t.data[i * 3 + 2] = static_cast<double>(i % 4);
    }
    ForestParams p;
    p.n_trees = 8;
    p.min_leaf = 2;
    p.mtry = 3;
    const auto m = fit(t, p);
    const auto text = save_model(m);
    const auto back = load_model(text);
    CHECK(back == m);
    CHECK(save_model(back) == text);
    for (std::size_t i = 0; i < t.n_rows(); i += 7) {
        REQUIRE(predict_quantile(back, t.row(i), 0.3) == predict_quantile(m, t.row(i), 0.3));
    }
    CHECK_THROWS_AS(load_model("peakopt-qrf v2\n"), ParseError);
}

TEST_CASE("predict_series shape, masking and parallel equivalence")
{
    const auto cal = series::build_calendar(series::parse_date("2020-10-05"), 1, {});
    features::FeatureSpec spec;
    spec.fourier_year = 0;
    std::vector<double> v(96);
    for (int p = 0; p < 96; ++p) {
        v[static_cast<std::size_t>(p)] = p < 48 ? 1.0 : 5.0;
    }
    std::vector<features::NamedSeries> s{{"a", series::TimeSeries(cal, v)}};
    const auto table = features::assemble_table(s, spec, {});
    ForestParams p;
    p.n_trees = 10;
    const auto m = fit(table, p);
    auto matrix = features::build_feature_matrix(cal, spec, {});
    matrix.row_available[10] = false;
    const auto out = predict_series(m, matrix, 0.5);
    CHECK(out.size() == 96);
    CHECK_FALSE(out.observed(10));
    CHECK(out == predict_series_serial(m, matrix, 0.5));

    const auto flat = fit(features::assemble_table(
                              std::vector<features::NamedSeries>{{"c", series::TimeSeries(cal, std::vector<double>(96, 2.0))}},
                              spec, {}),
                          p);
    const auto flat_out = predict_series(flat, features::build_feature_matrix(cal, spec, {}), 0.5);
    CHECK(flat_out.observed_values() == std::vector<double>(96, 2.0));

    spec.dow_binaries = false;
    CHECK_THROWS_AS(predict_series(m, features::build_feature_matrix(cal, spec, {}), 0.5), PredictionError);
}

TEST_CASE("pooled model uses the series identity")
{
    const auto cal = series::build_calendar(series::parse_date("2020-10-05"), 3, {});
    features::FeatureSpec spec;
    spec.fourier_year = 0;
    spec.dow_binaries = false;
    spec.include_series_id = true;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<features::NamedSeries> pooled;
    for (int s = 0; s < 6; ++s) {
        std::vector<double> v(static_cast<std::size_t>(cal.n_periods()));
        for (int p = 0; p < cal.n_periods(); ++p) {
            const double h = cal.hour_of(p);
            v[static_cast<std::size_t>(p)] = (1.0 + s) * std::max(0.0, std::sin((h - 6.0) / 12.0 * M_PI)) + noise(rng);
        }
        pooled.push_back({"solar" + std::to_string(s), series::TimeSeries(cal, v)});
    }
    ForestParams p;
    p.n_trees = 30;
    const auto model = fit(features::assemble_table(pooled, spec, {}), p);
    const auto own0 = fit(features::assemble_table(std::span(pooled).subspan(0, 1), spec, {}), p);
    spec.include_series_id = true;

    const auto pred0 = predict_series(model, features::build_feature_matrix(cal, spec, {}, 0), 0.5);
    const auto pred5 = predict_series(model, features::build_feature_matrix(cal, spec, {}, 5), 0.5);
    const auto solo0 = predict_series(own0, features::build_feature_matrix(cal, spec, {}, 0), 0.5);
    double diff = 0.0;
    double err0 = 0.0;
    double err5 = 0.0;
    for (int t = 0; t < cal.n_periods(); ++t) {
        diff += std::abs(pred0[t] - pred5[t]);
        err0 += std::abs(pred0[t] - solo0[t]);
        err5 += std::abs(pred5[t] - solo0[t]);
    }
    CHECK(diff > 1.0);
    CHECK(err0 < err5);
}

namespace {

struct ToyConfig {
    int trees = 10;
    bool lags = false;
    bool dow = false;
};

} // namespace

TEST_CASE("greedy search keeps strict improvements only")
{
    // MASE landscape: lags help, dow is neutral, more trees hurt.
    std::function<series::MaseReport(const ToyConfig&)> eval = [](const ToyConfig& c) {
        double m = 0.7;
        if (c.lags) {
            m -= 0.1;
        }
        if (c.trees > 10) {
            m += 0.05;
        }
        return series::make_mase_report({{"a", m}, {"b", m}});
    };
    std::vector<ConfigDelta<ToyConfig>> deltas{
        {"add lags", [](ToyConfig c) { c.lags = true; return c; }},
        {"dow binaries", [](ToyConfig c) { c.dow = true; return c; }},
        {"more trees", [](ToyConfig c) { c.trees = 50; return c; }},
        {"broken", [](const ToyConfig&) -> ToyConfig { throw std::runtime_error("bad data"); }},
    };
    const auto [best, log] = greedy_config_search(ToyConfig{}, deltas, eval);
    CHECK(best.lags);
    CHECK_FALSE(best.dow);
    CHECK(best.trees == 10);
    REQUIRE(log.steps.size() == 4);
    CHECK(log.steps[0].retained);
    CHECK_FALSE(log.steps[1].retained);
    CHECK(log.steps[1].mase_after == log.steps[1].mase_before);
    CHECK_FALSE(log.steps[2].retained);
    CHECK_FALSE(log.steps[3].retained);
    CHECK(log.steps[3].error == "bad data");
    for (const auto& s : log.steps) {
        CHECK(s.retained == (s.mase_after < s.mase_before));
    }
    CHECK(log.final_mase <= log.initial_mase);

    const auto [same, empty_log] = greedy_config_search(ToyConfig{}, {}, eval);
    CHECK(same.trees == 10);
    CHECK(empty_log.steps.empty());
}
