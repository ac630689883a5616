#include "peakopt/errors.hpp"
#include "peakopt/forest/forest.hpp"
#include "peakopt/forest/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace peakopt::forest {

int Tree::route(std::span<const double> row, const FeatureSchema& schema) const
{
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(node)];
        const double x = row[static_cast<std::size_t>(n.feature)];
        const bool left = schema.kinds[static_cast<std::size_t>(n.feature)] == ColumnKind::categorical
                              ? x == n.threshold
                              : x <= n.threshold;
        node = left ? n.left : n.right;
    }
    return node;
}

int Tree::leaf_count() const
{
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

// Splits are accepted only when they remove more than this fraction of the
// node's sum of squared deviations; guards against round-off "improvements".
constexpr double kRelativeGainFloor = 1e-10;

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class Grower {
public:
    Grower(const FeatureTable& table, const ForestParams& params, int mtry, int index)
        : table_(table), params_(params), mtry_(mtry), rng_(params.seed, static_cast<std::uint64_t>(index))
    {
    }

    Tree grow()
    {
        const std::size_t n = table_.n_rows();
        rows_.resize(n);
        if (params_.bootstrap) {
            for (auto& r : rows_) {
                r = static_cast<std::size_t>(rng_.below(n));
            }
        } else {
            std::iota(rows_.begin(), rows_.end(), std::size_t{0});
        }
        features_.resize(table_.n_cols());
        build(0, n);
        return std::move(tree_);
    }

private:
    // Returns the index of the node created for rows_[begin, end).
    int build(std::size_t begin, std::size_t end)
    {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        const Split split = best_split(begin, end);
        if (split.feature < 0) {
            make_leaf(id, begin, end);
            return id;
        }
        const bool categorical = table_.schema.kinds[static_cast<std::size_t>(split.feature)] == ColumnKind::categorical;
        const auto mid = std::stable_partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                               rows_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t r) {
                                                   const double x = table_.at(r, static_cast<std::size_t>(split.feature));
                                                   return categorical ? x == split.threshold : x <= split.threshold;
                                               });
        const auto mid_index = static_cast<std::size_t>(mid - rows_.begin());
        tree_.nodes[static_cast<std::size_t>(id)].feature = split.feature;
        tree_.nodes[static_cast<std::size_t>(id)].threshold = split.threshold;
        const int left = build(begin, mid_index);
        const int right = build(mid_index, end);
        tree_.nodes[static_cast<std::size_t>(id)].left = left;
        tree_.nodes[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    void make_leaf(int id, std::size_t begin, std::size_t end)
    {
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.leaf_begin = static_cast<int>(tree_.leaf_values.size());
        node.leaf_size = static_cast<int>(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            tree_.leaf_values.push_back(table_.target[rows_[i]]);
        }
        std::sort(tree_.leaf_values.begin() + node.leaf_begin, tree_.leaf_values.end());
    }

    Split best_split(std::size_t begin, std::size_t end)
    {
        Split best;
        const std::size_t n = end - begin;
        const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
        if (n < 2 * min_leaf) {
            return best;
        }
        double mean = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            mean += table_.target[rows_[i]];
        }
        mean /= static_cast<double>(n);
        double sse = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double d = table_.target[rows_[i]] - mean;
            sse += d * d;
        }
        if (!(sse > 0.0)) {
            return best;
        }

        // Partial Fisher-Yates draw of mtry features, then ascending order so
        // ties resolve to the lowest feature index.
        std::iota(features_.begin(), features_.end(), 0);
        for (int k = 0; k < mtry_; ++k) {
            const auto j = static_cast<std::size_t>(k) + rng_.below(features_.size() - static_cast<std::size_t>(k));
            std::swap(features_[static_cast<std::size_t>(k)], features_[j]);
        }
        std::vector<int> chosen(features_.begin(), features_.begin() + mtry_);
        std::sort(chosen.begin(), chosen.end());

        for (const int f : chosen) {
            const bool categorical = table_.schema.kinds[static_cast<std::size_t>(f)] == ColumnKind::categorical;
            if (categorical) {
                scan_categorical(f, begin, end, mean, min_leaf, best);
            } else {
                scan_numeric(f, begin, end, mean, min_leaf, best);
            }
        }
        if (best.feature >= 0 && !(best.gain > kRelativeGainFloor * sse)) {
            best = Split{};
        }
        return best;
    }

    // gain = SSE(parent) - SSE(left) - SSE(right) with targets centred on
    // the parent mean: sL^2/nL + sR^2/nR.
    static double gain(double sum_left, std::size_t n_left, double sum_total, std::size_t n_total)
    {
        const double sum_right = sum_total - sum_left;
        const auto nl = static_cast<double>(n_left);
        const auto nr = static_cast<double>(n_total - n_left);
        return sum_left * sum_left / nl + sum_right * sum_right / nr;
    }

    void scan_numeric(int f, std::size_t begin, std::size_t end, double mean, std::size_t min_leaf, Split& best)
    {
        pairs_.clear();
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = rows_[i];
            pairs_.emplace_back(table_.at(r, static_cast<std::size_t>(f)), table_.target[r] - mean);
        }
        std::sort(pairs_.begin(), pairs_.end());
        const std::size_t n = pairs_.size();
        double total = 0.0;
        for (const auto& p : pairs_) {
            total += p.second;
        }
        double left = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left += pairs_[i].second;
            const std::size_t nl = i + 1;
            if (nl < min_leaf || n - nl < min_leaf || !(pairs_[i].first < pairs_[i + 1].first)) {
                continue;
            }
            const double g = gain(left, nl, total, n);
            if (g > best.gain) {
                double thr = pairs_[i].first + 0.5 * (pairs_[i + 1].first - pairs_[i].first);
                if (!(thr < pairs_[i + 1].first)) {
                    thr = pairs_[i].first;
                }
                best = Split{f, thr, g};
            }
        }
    }

    void scan_categorical(int f, std::size_t begin, std::size_t end, double mean, std::size_t min_leaf, Split& best)
    {
        pairs_.clear();
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = rows_[i];
            pairs_.emplace_back(table_.at(r, static_cast<std::size_t>(f)), table_.target[r] - mean);
        }
        std::sort(pairs_.begin(), pairs_.end());
        const std::size_t n = pairs_.size();
        double total = 0.0;
        for (const auto& p : pairs_) {
            total += p.second;
        }
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < n && pairs_[j].first == pairs_[i].first) {
                sum += pairs_[j].second;
                ++j;
            }
            const std::size_t nl = j - i;
            if (nl >= min_leaf && n - nl >= min_leaf) {
                const double g = gain(sum, nl, total, n);
                if (g > best.gain) {
                    best = Split{f, pairs_[i].first, g};
                }
            }
            i = j;
        }
    }

    const FeatureTable& table_;
    const ForestParams& params_;
    int mtry_;
    CounterRng rng_;
    Tree tree_;
    std::vector<std::size_t> rows_;
    std::vector<int> features_;
    std::vector<std::pair<double, double>> pairs_;
};

} // namespace

Tree grow_tree(const FeatureTable& table, const ForestParams& params, int mtry, int index)
{
    return Grower(table, params, mtry, index).grow();
}

} // namespace peakopt::forest
