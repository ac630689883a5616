#pragma once

#include "peakopt/features/features.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace peakopt::forest {

using features::ColumnKind;
using features::FeatureMatrix;
using features::FeatureSchema;
using features::FeatureTable;

struct ForestParams {
    int n_trees = 500;
    /// 0 selects ceil(sqrt(feature count)).
    int mtry = 0;
    int min_leaf = 5;
    std::uint64_t seed = 1;
    /// Off only for diagnostics: each tree then sees the table once, in order.
    bool bootstrap = true;

    friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Split nodes route x <= threshold (numeric) or x == threshold (categorical)
/// to the left child. Leaf nodes own a sorted slice of leaf_values.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_begin = 0;
    int leaf_size = 0;

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class Tree {
public:
    std::vector<TreeNode> nodes;
    std::vector<double> leaf_values;

    /// Index of the leaf node reached by row.
    int route(std::span<const double> row, const FeatureSchema& schema) const;
    std::span<const double> leaf(int node) const
    {
        const auto& n = nodes[static_cast<std::size_t>(node)];
        return {leaf_values.data() + n.leaf_begin, static_cast<std::size_t>(n.leaf_size)};
    }
    int leaf_count() const;

    friend bool operator==(const Tree&, const Tree&) = default;
};

class ForestModel {
public:
    ForestParams params;
    /// mtry after resolving the 0 default.
    int mtry = 1;
    FeatureSchema schema;
    std::vector<Tree> trees;

    int n_trees() const { return static_cast<int>(trees.size()); }
    friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

/// Grows params.n_trees trees in parallel. Tree t draws from CounterRng(seed, t),
/// so the result is identical to fit_serial. Throws FitError on an empty
/// table or invalid parameters.
ForestModel fit(const FeatureTable& table, const ForestParams& params);
ForestModel fit_serial(const FeatureTable& table, const ForestParams& params);

/// Grows tree `index` of the forest described by params.
Tree grow_tree(const FeatureTable& table, const ForestParams& params, int mtry, int index);

/// Weighted lower quantile of the pooled leaf targets: each tree carries total
/// weight 1/n_trees, split evenly over its leaf. Returns the smallest value
/// whose cumulative weight reaches q. Throws PredictionError when the row
/// width differs from the schema or q is outside (0, 1).
double predict_quantile(const ForestModel& model, std::span<const double> row, double q);

/// One prediction per available row of m; unavailable rows come back masked.
/// Throws PredictionError when m's schema differs from the model's.
series::TimeSeries predict_series(const ForestModel& model, const FeatureMatrix& m, double q);
series::TimeSeries predict_series_serial(const ForestModel& model, const FeatureMatrix& m, double q);

/// Versioned text form; numbers are written in shortest round-trip form so
/// load(save(m)) == m bit for bit.
std::string save_model(const ForestModel& model);
/// Throws ParseError on a malformed document.
ForestModel load_model(std::string_view text);

} // namespace peakopt::forest
