#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace uplift {

struct TreeParams {
    int max_depth = 8;
    int min_leaf_size = 5;
    /// > 1 enables bagging: each tree fits a seeded bootstrap resample and
    /// predictions are averaged. 1 fits a single tree on the full data.
    int n_trees = 1;
    std::uint64_t seed = 0;
};

/// Axis-aligned regression tree grown by greedy variance reduction.
///
/// Splits maximize the sum-of-squared-error reduction; ties go to the lowest
/// feature index, then the lowest threshold. Rows are put into a canonical
/// order before fitting, so predictions are invariant to training-row
/// permutation.
class RegressionTree {
public:
    struct Node {
        int feature = -1;  ///< -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };

    static RegressionTree fit(const std::vector<std::vector<double>>& features,
                              const std::vector<double>& targets, const TreeParams& params);

    /// Rebuild from serialized nodes (index 0 is the root).
    static RegressionTree from_nodes(std::vector<Node> nodes);

    double predict(const std::vector<double>& x) const;

    const std::vector<Node>& nodes() const { return nodes_; }
    int leaf_count() const;

private:
    std::vector<Node> nodes_;

    friend class TreeBuilder;
};

/// Fixed ensemble of regression trees (size 1 unless bagging is requested).
struct BaggedTrees {
    std::vector<RegressionTree> trees;

    static BaggedTrees fit(const std::vector<std::vector<double>>& features,
                           const std::vector<double>& targets, const TreeParams& params);

    double predict(const std::vector<double>& x) const;
};

}  // namespace uplift
