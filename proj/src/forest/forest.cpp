#include "peakopt/forest/forest.hpp"

#include "peakopt/errors.hpp"
#include "peakopt/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace peakopt::forest {

namespace {

int resolve_mtry(const FeatureTable& table, const ForestParams& params)
{
    if (table.n_rows() == 0) {
        throw FitError("cannot fit a forest on an empty table");
    }
    if (table.n_cols() == 0) {
        throw FitError("cannot fit a forest without features");
    }
    if (params.n_trees < 1 || params.min_leaf < 1) {
        throw FitError("n_trees and min_leaf must be at least 1");
    }
    const int p = static_cast<int>(table.n_cols());
    const int mtry = params.mtry == 0 ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p)))) : params.mtry;
    if (mtry < 1 || mtry > p) {
        throw FitError("mtry must lie in [1, feature count]");
    }
    return mtry;
}

ForestModel empty_model(const FeatureTable& table, const ForestParams& params, int mtry)
{
    ForestModel m;
    m.params = params;
    m.mtry = mtry;
    m.schema = table.schema;
    m.trees.resize(static_cast<std::size_t>(params.n_trees));
    return m;
}

void check_q(double q)
{
    if (!(q > 0.0 && q < 1.0)) {
        throw PredictionError("quantile level must lie in (0, 1)");
    }
}

void check_schema(const ForestModel& model, const FeatureMatrix& m)
{
    if (!(m.schema == model.schema)) {
        throw PredictionError("feature schema does not match the model");
    }
}

} // namespace

ForestModel fit(const FeatureTable& table, const ForestParams& params)
{
    const int mtry = resolve_mtry(table, params);
    ForestModel m = empty_model(table, params, mtry);
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < params.n_trees; ++t) {
        m.trees[static_cast<std::size_t>(t)] = grow_tree(table, params, mtry, t);
    }
    return m;
}

ForestModel fit_serial(const FeatureTable& table, const ForestParams& params)
{
    const int mtry = resolve_mtry(table, params);
    ForestModel m = empty_model(table, params, mtry);
    for (int t = 0; t < params.n_trees; ++t) {
        m.trees[static_cast<std::size_t>(t)] = grow_tree(table, params, mtry, t);
    }
    return m;
}

double predict_quantile(const ForestModel& model, std::span<const double> row, double q)
{
    check_q(q);
    if (row.size() != model.schema.size()) {
        throw PredictionError("row has " + std::to_string(row.size()) + " features, model expects "
                              + std::to_string(model.schema.size()));
    }
    if (model.trees.empty()) {
        throw PredictionError("model has no trees");
    }
    // Weights are kept in units of 1/n_trees so a tree's leaf sums to 1.
    std::vector<std::pair<double, double>> pooled;
    for (const auto& tree : model.trees) {
        const auto leaf = tree.leaf(tree.route(row, model.schema));
        const double w = 1.0 / static_cast<double>(leaf.size());
        for (const double v : leaf) {
            pooled.emplace_back(v, w);
        }
    }
    std::sort(pooled.begin(), pooled.end());
    const double total = static_cast<double>(model.trees.size());
    const double target = q * total - 1e-12 * total;
    double cum = 0.0;
    for (const auto& [v, w] : pooled) {
        cum += w;
        if (cum >= target) {
            return v;
        }
    }
    return pooled.back().first;
}

series::TimeSeries predict_series(const ForestModel& model, const FeatureMatrix& m, double q)
{
    check_q(q);
    check_schema(model, m);
    const auto n = static_cast<std::ptrdiff_t>(m.n_rows());
    std::vector<double> values(m.n_rows(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
        if (m.row_available[r]) {
            values[r] = predict_quantile(model, m.row(r), q);
        }
    }
    return series::TimeSeries(m.calendar, std::move(values), m.row_available);
}

series::TimeSeries predict_series_serial(const ForestModel& model, const FeatureMatrix& m, double q)
{
    check_q(q);
    check_schema(model, m);
    std::vector<double> values(m.n_rows(), 0.0);
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        if (m.row_available[r]) {
            values[r] = predict_quantile(model, m.row(r), q);
        }
    }
    return series::TimeSeries(m.calendar, std::move(values), m.row_available);
}

std::string save_model(const ForestModel& model)
{
    std::ostringstream out;
    const auto& p = model.params;
    out << "peakopt-qrf v1\n";
    out << "params " << p.n_trees << ' ' << p.mtry << ' ' << p.min_leaf << ' ' << p.seed << ' '
        << (p.bootstrap ? 1 : 0) << ' ' << model.mtry << '\n';
    out << "features " << model.schema.size() << '\n';
    for (std::size_t j = 0; j < model.schema.size(); ++j) {
        out << "f " << model.schema.names[j] << ' '
            << (model.schema.kinds[j] == ColumnKind::categorical ? "categorical" : "numeric") << '\n';
    }
    for (const auto& tree : model.trees) {
        out << "tree " << tree.nodes.size() << '\n';
        for (const auto& n : tree.nodes) {
            if (n.is_leaf()) {
                out << 'l';
                for (const double v : tree.leaf(static_cast<int>(&n - tree.nodes.data()))) {
                    out << ' ' << format_number(v);
                }
                out << '\n';
            } else {
                out << "s " << n.feature << ' ' << format_number(n.threshold) << ' ' << n.left << ' ' << n.right
                    << '\n';
            }
        }
    }
    return out.str();
}

ForestModel load_model(std::string_view text)
{
    auto lines = split(text, '\n');
    std::size_t pos = 0;
    const auto next = [&]() -> std::vector<std::string_view> {
        while (pos < lines.size() && lines[pos].empty()) {
            ++pos;
        }
        if (pos == lines.size()) {
            throw ParseError("model document ends early");
        }
        return split_whitespace(lines[pos++]);
    };
    auto t = next();
    if (t.size() != 2 || t[0] != "peakopt-qrf" || t[1] != "v1") {
        throw ParseError("not a peakopt-qrf v1 document");
    }
    ForestModel m;
    t = next();
    if (t.size() != 7 || t[0] != "params") {
        throw ParseError("malformed params line");
    }
    m.params.n_trees = static_cast<int>(parse_integer(t[1]));
    m.params.mtry = static_cast<int>(parse_integer(t[2]));
    m.params.min_leaf = static_cast<int>(parse_integer(t[3]));
    m.params.seed = std::stoull(std::string(t[4]));
    m.params.bootstrap = parse_integer(t[5]) != 0;
    m.mtry = static_cast<int>(parse_integer(t[6]));
    t = next();
    if (t.size() != 2 || t[0] != "features") {
        throw ParseError("malformed features line");
    }
    const long n_features = parse_integer(t[1]);
    for (long j = 0; j < n_features; ++j) {
        t = next();
        if (t.size() != 3 || t[0] != "f" || (t[2] != "numeric" && t[2] != "categorical")) {
            throw ParseError("malformed feature line");
        }
        m.schema.names.emplace_back(t[1]);
        m.schema.kinds.push_back(t[2] == "categorical" ? ColumnKind::categorical : ColumnKind::numeric);
    }
    for (int k = 0; k < m.params.n_trees; ++k) {
        t = next();
        if (t.size() != 2 || t[0] != "tree") {
            throw ParseError("malformed tree header");
        }
        Tree tree;
        const long n_nodes = parse_integer(t[1]);
        for (long i = 0; i < n_nodes; ++i) {
            t = next();
            TreeNode node;
            if (!t.empty() && t[0] == "l" && t.size() >= 2) {
                node.leaf_begin = static_cast<int>(tree.leaf_values.size());
                node.leaf_size = static_cast<int>(t.size() - 1);
                for (std::size_t j = 1; j < t.size(); ++j) {
                    tree.leaf_values.push_back(parse_number(t[j]));
                }
            } else if (t.size() == 5 && t[0] == "s") {
                node.feature = static_cast<int>(parse_integer(t[1]));
                node.threshold = parse_number(t[2]);
                node.left = static_cast<int>(parse_integer(t[3]));
                node.right = static_cast<int>(parse_integer(t[4]));
                if (node.feature < 0 || node.feature >= n_features || node.left <= i || node.right <= i
                    || node.left >= n_nodes || node.right >= n_nodes) {
                    throw ParseError("split node references are out of range");
                }
            } else {
                throw ParseError("malformed tree node");
            }
            tree.nodes.push_back(node);
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

} // namespace peakopt::forest
