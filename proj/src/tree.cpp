#include "uplift/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uplift/error.hpp"
#include "uplift/rng.hpp"

namespace uplift {

namespace {

struct SplitChoice {
    double reduction = 0.0;
    int feature = -1;
    double threshold = 0.0;
    std::size_t left_size = 0;
};

}  // namespace

class TreeBuilder {
public:
    TreeBuilder(const std::vector<std::vector<double>>& features, const std::vector<double>& targets,
                const TreeParams& params)
        : x_(features), y_(targets), params_(params) {}

    RegressionTree build(std::vector<std::size_t> indices) {
        RegressionTree tree;
        // Canonical row order: sorting by (covariates, target) makes every
        // downstream sum independent of the caller's row order.
        std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
            if (x_[a] != x_[b]) return x_[a] < x_[b];
            return y_[a] < y_[b];
        });
        nodes_ = &tree.nodes_;
        grow(indices, 0);
        return tree;
    }

private:
    int grow(const std::vector<std::size_t>& idx, int depth) {
        int node_id = static_cast<int>(nodes_->size());
        nodes_->emplace_back();

        double sum = 0.0;
        for (std::size_t i : idx) sum += y_[i];
        const std::size_t n = idx.size();

        bool constant = true;
        for (std::size_t i : idx) {
            if (y_[i] != y_[idx[0]]) {
                constant = false;
                break;
            }
        }
        (*nodes_)[static_cast<std::size_t>(node_id)].value =
            constant ? y_[idx[0]] : sum / static_cast<double>(n);

        if (constant || depth >= params_.max_depth ||
            n < 2 * static_cast<std::size_t>(params_.min_leaf_size)) {
            return node_id;
        }

        SplitChoice best = find_split(idx);
        if (best.feature < 0) return node_id;

        std::vector<std::size_t> left, right;
        left.reserve(best.left_size);
        right.reserve(n - best.left_size);
        for (std::size_t i : idx) {
            (x_[i][static_cast<std::size_t>(best.feature)] < best.threshold ? left : right)
                .push_back(i);
        }

        int l = grow(left, depth + 1);
        int r = grow(right, depth + 1);
        auto& node = (*nodes_)[static_cast<std::size_t>(node_id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return node_id;
    }

    SplitChoice find_split(const std::vector<std::size_t>& idx) const {
        const std::size_t n = idx.size();
        const std::size_t min_leaf = static_cast<std::size_t>(params_.min_leaf_size);
        const int d = static_cast<int>(x_[idx[0]].size());

        double total = 0.0, total_sq = 0.0;
        for (std::size_t i : idx) {
            total += y_[i];
            total_sq += y_[i] * y_[i];
        }
        const double parent_sse = total_sq - total * total / static_cast<double>(n);

        SplitChoice best;
        std::vector<std::pair<double, double>> vals(n);  // (feature value, target)
        for (int f = 0; f < d; ++f) {
            for (std::size_t p = 0; p < n; ++p) {
                vals[p] = {x_[idx[p]][static_cast<std::size_t>(f)], y_[idx[p]]};
            }
            std::stable_sort(vals.begin(), vals.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });

            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t p = 1; p < n; ++p) {
                left_sum += vals[p - 1].second;
                left_sq += vals[p - 1].second * vals[p - 1].second;
                if (p < min_leaf || n - p < min_leaf) continue;
                if (!(vals[p - 1].first < vals[p].first)) continue;

                const double right_sum = total - left_sum;
                const double right_sq = total_sq - left_sq;
                const double sse_l = left_sq - left_sum * left_sum / static_cast<double>(p);
                const double sse_r =
                    right_sq - right_sum * right_sum / static_cast<double>(n - p);
                const double reduction = parent_sse - sse_l - sse_r;
                if (reduction > best.reduction) {
                    best.reduction = reduction;
                    best.feature = f;
                    best.threshold = (vals[p - 1].first + vals[p].first) / 2.0;
                    best.left_size = p;
                }
            }
        }
        if (!(best.reduction > 0.0)) best.feature = -1;
        return best;
    }

    const std::vector<std::vector<double>>& x_;
    const std::vector<double>& y_;
    const TreeParams& params_;
    std::vector<RegressionTree::Node>* nodes_ = nullptr;
};

RegressionTree RegressionTree::fit(const std::vector<std::vector<double>>& features,
                                   const std::vector<double>& targets, const TreeParams& params) {
    if (features.empty()) throw ArgumentError("fit_tree: empty input");
    if (features.size() != targets.size()) {
        throw ArgumentError("fit_tree: feature and target counts differ");
    }
    if (params.min_leaf_size < 1) throw ArgumentError("fit_tree: min_leaf_size must be >= 1");
    if (params.max_depth < 0) throw ArgumentError("fit_tree: max_depth must be >= 0");
    if (features.size() < static_cast<std::size_t>(params.min_leaf_size)) {
        throw ArgumentError("fit_tree: fewer rows than min_leaf_size");
    }
    const std::size_t d = features[0].size();
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != d) throw ArgumentError("fit_tree: ragged feature matrix");
        for (double v : features[i]) {
            if (std::isnan(v)) throw ArgumentError("fit_tree: NaN covariate");
        }
        if (std::isnan(targets[i])) throw ArgumentError("fit_tree: NaN target");
    }

    std::vector<std::size_t> indices(features.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    return TreeBuilder(features, targets, params).build(std::move(indices));
}

RegressionTree RegressionTree::from_nodes(std::vector<Node> nodes) {
    if (nodes.empty()) throw ArgumentError("tree needs at least one node");
    RegressionTree t;
    t.nodes_ = std::move(nodes);
    return t;
}

double RegressionTree::predict(const std::vector<double>& x) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
        const Node& nd = nodes_[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(node)].value;
}

int RegressionTree::leaf_count() const {
    int count = 0;
    for (const auto& nd : nodes_) {
        if (nd.feature < 0) ++count;
    }
    return count;
}

BaggedTrees BaggedTrees::fit(const std::vector<std::vector<double>>& features,
                             const std::vector<double>& targets, const TreeParams& params) {
    if (params.n_trees < 1) throw ArgumentError("n_trees must be >= 1");
    BaggedTrees out;
    if (params.n_trees == 1) {
        out.trees.push_back(RegressionTree::fit(features, targets, params));
        return out;
    }
    const std::size_t n = features.size();
    if (n == 0) throw ArgumentError("fit_tree: empty input");
    for (int t = 0; t < params.n_trees; ++t) {
        Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        xs.reserve(n);
        ys.reserve(n);
        std::vector<std::size_t> draws(n);
        for (std::size_t i = 0; i < n; ++i) draws[i] = rng.bounded(n);
        std::sort(draws.begin(), draws.end());
        for (std::size_t i : draws) {
            xs.push_back(features[i]);
            ys.push_back(targets[i]);
        }
        out.trees.push_back(RegressionTree::fit(xs, ys, params));
    }
    return out;
}

double BaggedTrees::predict(const std::vector<double>& x) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    return sum / static_cast<double>(trees.size());
}

}  // namespace uplift
