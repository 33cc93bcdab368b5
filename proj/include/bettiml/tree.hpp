#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace bettiml {

/// Internal nodes send x[feature] < threshold to `left`. Leaves carry one
/// value per output (1 for boosted regression trees, class_count for forest
/// trees).
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double gain = 0.0;
    std::vector<double> leaf;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::vector<TreeNode>& nodes() { return nodes_; }

    const std::vector<double>& leaf_for(std::span<const double> x) const {
        int k = 0;
        while (!nodes_[k].is_leaf())
            k = x[nodes_[k].feature] < nodes_[k].threshold ? nodes_[k].left : nodes_[k].right;
        return nodes_[k].leaf;
    }

    int depth() const;
    /// Structural validity: child links in range, every node reachable once,
    /// feature indices below n_features, leaves of width leaf_width.
    bool well_formed(std::size_t n_features, std::size_t leaf_width) const;

    bool operator==(const DecisionTree&) const = default;

private:
    std::vector<TreeNode> nodes_;
};

namespace learner {

/// A candidate replaces the incumbent only when its gain is larger by more
/// than kGainTolerance * max(1, |incumbent|). Gains that differ by rounding
/// alone therefore tie, and ties keep the earlier (feature, threshold). The
/// incumbent starts at 0, so splits need a gain above kGainTolerance.
inline constexpr double kGainTolerance = 1e-10;

inline bool improves(double gain, double incumbent) {
    const double scale = incumbent < 0 ? -incumbent : incumbent;
    return gain - incumbent > kGainTolerance * (scale > 1.0 ? scale : 1.0);
}

/// Column-major view of a feature matrix with each value replaced by its
/// rank among the feature's distinct values. Scanning ranks visits exactly
/// the candidate thresholds of an exact greedy search.
class ColumnIndex {
public:
    ColumnIndex(std::span<const double> row_major, std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return distinct_.size(); }
    double value(std::size_t feature, std::uint32_t rank) const { return distinct_[feature][rank]; }
    std::uint32_t rank(std::size_t feature, std::size_t row) const {
        return ranks_[feature * rows_ + row];
    }
    std::size_t distinct_count(std::size_t feature) const { return distinct_[feature].size(); }

private:
    std::size_t rows_;
    std::vector<std::vector<double>> distinct_;
    std::vector<std::uint32_t> ranks_;
};

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;

    bool valid() const { return feature >= 0; }
};

// ---- second-order (gradient/hessian) regression trees ----

struct GradientTreeParams {
    int max_depth = 6;
    double lambda = 1.0;
    double min_child_weight = 1.0;
    double learning_rate = 0.1;
};

double newton_gain(double g_left, double h_left, double g_right, double h_right, double lambda);

/// Best split over `features` for the node holding `rows` (ascending). Ties
/// go to the smallest feature index, then the smallest threshold.
Split best_gradient_split(const ColumnIndex& index, std::span<const std::uint32_t> rows,
                          std::span<const double> grad, std::span<const double> hess,
                          std::span<const int> features, const GradientTreeParams& params);

/// Record of one node visited during growth.
struct NodeTrace {
    int depth = 0;
    std::vector<std::uint32_t> rows;
    std::vector<int> features;
    Split split;  // invalid when the node became a leaf
};

/// Features available at a given depth.
using LevelSampler = std::function<std::vector<int>(int depth)>;

/// Grows one tree depth-first (left subtree first). Leaf value is
/// learning_rate * -G / (H + lambda).
DecisionTree grow_gradient_tree(const ColumnIndex& index, std::span<const std::uint32_t> rows,
                                std::span<const double> grad, std::span<const double> hess,
                                const LevelSampler& features, const GradientTreeParams& params,
                                std::vector<NodeTrace>* trace = nullptr);

// ---- classification trees (Gini) ----

/// Weighted impurity decrease n*gini(parent) - nL*gini(L) - nR*gini(R).
double gini_decrease(std::span<const double> left_counts, std::span<const double> right_counts);

/// `rows` may repeat (bootstrap); must be ascending.
Split best_gini_split(const ColumnIndex& index, std::span<const std::uint32_t> rows,
                      std::span<const int> labels, int class_count, std::span<const int> features);

/// Candidate features drawn for a node, given its preorder id.
using NodeSampler = std::function<std::vector<int>(int node_id)>;

/// Leaves hold class frequencies. Nodes stop splitting when pure, at
/// max_depth, or when no candidate feature improves impurity.
DecisionTree grow_gini_tree(const ColumnIndex& index, std::span<const std::uint32_t> rows,
                            std::span<const int> labels, int class_count, int max_depth,
                            const NodeSampler& features, std::vector<NodeTrace>* trace = nullptr);

}  // namespace learner
}  // namespace bettiml
