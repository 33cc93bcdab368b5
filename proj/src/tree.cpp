#include "bettiml/tree.hpp"

#include <algorithm>
#include <numeric>

#include "bettiml/error.hpp"

namespace bettiml {

int DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    int best = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [k, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes_[k].is_leaf()) {
            stack.emplace_back(nodes_[k].left, d + 1);
            stack.emplace_back(nodes_[k].right, d + 1);
        }
    }
    return best;
}

bool DecisionTree::well_formed(std::size_t n_features, std::size_t leaf_width) const {
    if (nodes_.empty()) return false;
    std::vector<int> visits(nodes_.size(), 0);
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int k = stack.back();
        stack.pop_back();
        if (k < 0 || static_cast<std::size_t>(k) >= nodes_.size() || visits[k]++) return false;
        const auto& n = nodes_[k];
        if (n.is_leaf()) {
            if (n.leaf.size() != leaf_width) return false;
        } else {
            if (static_cast<std::size_t>(n.feature) >= n_features) return false;
            stack.push_back(n.left);
            stack.push_back(n.right);
        }
    }
    return std::all_of(visits.begin(), visits.end(), [](int v) { return v == 1; });
}

namespace learner {

ColumnIndex::ColumnIndex(std::span<const double> row_major, std::size_t rows, std::size_t cols)
    : rows_(rows), distinct_(cols), ranks_(rows * cols) {
    if (row_major.size() != rows * cols) throw Error("ColumnIndex: matrix size mismatch");
    std::vector<std::uint32_t> order(rows);
    for (std::size_t f = 0; f < cols; ++f) {
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return row_major[a * cols + f] < row_major[b * cols + f];
        });
        auto& distinct = distinct_[f];
        for (const auto r : order) {
            const double v = row_major[r * cols + f];
            if (distinct.empty() || distinct.back() != v) distinct.push_back(v);
            ranks_[f * rows + r] = static_cast<std::uint32_t>(distinct.size() - 1);
        }
    }
}

namespace {

double midpoint(double a, double b) {
    const double m = 0.5 * (a + b);
    return a < m ? m : b;
}

// Groups the node's rows by distinct feature value, in ascending value order,
// and accumulates `width` statistics per group. Within a group, statistics are
// summed in row order on both paths so the result is path-independent.
class GroupScanner {
public:
    template <typename AddRow>
    void gather(const ColumnIndex& index, std::size_t feature,
                std::span<const std::uint32_t> rows, std::size_t width, AddRow&& add_row) {
        ranks_.clear();
        stats_.clear();
        const std::size_t nd = index.distinct_count(feature);
        if (nd <= 2 * rows.size() + 16) {
            bucket_.assign(nd * width, 0.0);
            touched_.assign(nd, 0);
            for (const auto r : rows) {
                const auto k = index.rank(feature, r);
                touched_[k] = 1;
                add_row(&bucket_[k * width], r);
            }
            for (std::size_t k = 0; k < nd; ++k) {
                if (!touched_[k]) continue;
                ranks_.push_back(static_cast<std::uint32_t>(k));
                stats_.insert(stats_.end(), bucket_.begin() + static_cast<long>(k * width),
                              bucket_.begin() + static_cast<long>((k + 1) * width));
            }
        } else {
            pairs_.clear();
            for (const auto r : rows) pairs_.emplace_back(index.rank(feature, r), r);
            std::sort(pairs_.begin(), pairs_.end());
            for (std::size_t i = 0; i < pairs_.size(); ++i) {
                if (i == 0 || pairs_[i].first != pairs_[i - 1].first) {
                    ranks_.push_back(pairs_[i].first);
                    stats_.resize(stats_.size() + width, 0.0);
                }
                add_row(&stats_[stats_.size() - width], pairs_[i].second);
            }
        }
    }

    std::size_t groups() const { return ranks_.size(); }
    std::uint32_t rank(std::size_t g) const { return ranks_[g]; }
    const double* stats(std::size_t g, std::size_t width) const { return &stats_[g * width]; }

private:
    std::vector<std::uint32_t> ranks_;
    std::vector<double> stats_;
    std::vector<double> bucket_;
    std::vector<char> touched_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_;
};

std::vector<int> sorted_unique(std::span<const int> features) {
    std::vector<int> f(features.begin(), features.end());
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
    return f;
}

}  // namespace

double newton_gain(double g_left, double h_left, double g_right, double h_right, double lambda) {
    const double g = g_left + g_right;
    const double h = h_left + h_right;
    return 0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda) -
                  g * g / (h + lambda));
}

Split best_gradient_split(const ColumnIndex& index, std::span<const std::uint32_t> rows,
                          std::span<const double> grad, std::span<const double> hess,
                          std::span<const int> features, const GradientTreeParams& params) {
    double g_total = 0.0;
    double h_total = 0.0;
    for (const auto r : rows) {
        g_total += grad[r];
        h_total += hess[r];
    }
    Split best;
    best.gain = 0.0;
    GroupScanner scan;
    for (const int f : sorted_unique(features)) {
        scan.gather(index, static_cast<std::size_t>(f), rows, 2, [&](double* s, std::uint32_t r) {
            s[0] += grad[r];
            s[1] += hess[r];
        });
        double g_left = 0.0;
        double h_left = 0.0;
        for (std::size_t k = 0; k + 1 < scan.groups(); ++k) {
            g_left += scan.stats(k, 2)[0];
            h_left += scan.stats(k, 2)[1];
            const double g_right = g_total - g_left;
            const double h_right = h_total - h_left;
            if (h_left < params.min_child_weight || h_right < params.min_child_weight) continue;
            const double gain = newton_gain(g_left, h_left, g_right, h_right, params.lambda);
            if (improves(gain, best.gain)) {
                best.feature = f;
                best.gain = gain;
                best.threshold = midpoint(index.value(f, scan.rank(k)), index.value(f, scan.rank(k + 1)));
            }
        }
    }
    return best;
}

namespace {

void partition_rows(const ColumnIndex& index, std::span<const std::uint32_t> rows, const Split& s,
                    std::vector<std::uint32_t>& left, std::vector<std::uint32_t>& right) {
    for (const auto r : rows) {
        const double v = index.value(s.feature, index.rank(s.feature, r));
        (v < s.threshold ? left : right).push_back(r);
    }
}

class GradientGrower {
public:
    GradientGrower(const ColumnIndex& index, std::span<const double> grad,
                   std::span<const double> hess, const LevelSampler& sampler,
                   const GradientTreeParams& params, std::vector<NodeTrace>* trace)
        : index_(index), grad_(grad), hess_(hess), sampler_(sampler), params_(params),
          trace_(trace) {}

    int grow(std::span<const std::uint32_t> rows, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        Split split;
        std::vector<int> features;
        if (depth < params_.max_depth && rows.size() >= 2) {
            features = sampler_(depth);
            split = best_gradient_split(index_, rows, grad_, hess_, features, params_);
        }
        if (trace_)
            trace_->push_back({depth, {rows.begin(), rows.end()}, features, split});
        if (!split.valid()) {
            double g = 0.0;
            double h = 0.0;
            for (const auto r : rows) {
                g += grad_[r];
                h += hess_[r];
            }
            nodes_[id].leaf = {params_.learning_rate * (-g / (h + params_.lambda))};
            return id;
        }
        std::vector<std::uint32_t> left;
        std::vector<std::uint32_t> right;
        partition_rows(index_, rows, split, left, right);
        nodes_[id].feature = split.feature;
        nodes_[id].threshold = split.threshold;
        nodes_[id].gain = split.gain;
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    DecisionTree finish() { return DecisionTree(std::move(nodes_)); }

private:
    const ColumnIndex& index_;
    std::span<const double> grad_;
    std::span<const double> hess_;
    const LevelSampler& sampler_;
    const GradientTreeParams& params_;
    std::vector<NodeTrace>* trace_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTree grow_gradient_tree(const ColumnIndex& index, std::span<const std::uint32_t> rows,
                                std::span<const double> grad, std::span<const double> hess,
                                const LevelSampler& features, const GradientTreeParams& params,
                                std::vector<NodeTrace>* trace) {
    if (rows.empty()) throw Error("cannot grow a tree on zero rows");
    GradientGrower grower(index, grad, hess, features, params, trace);
    grower.grow(rows, 0);
    return grower.finish();
}

double gini_decrease(std::span<const double> left_counts, std::span<const double> right_counts) {
    double n_left = 0.0;
    double n_right = 0.0;
    double sq_left = 0.0;
    double sq_right = 0.0;
    double sq_total = 0.0;
    for (std::size_t c = 0; c < left_counts.size(); ++c) {
        n_left += left_counts[c];
        n_right += right_counts[c];
        sq_left += left_counts[c] * left_counts[c];
        sq_right += right_counts[c] * right_counts[c];
        const double t = left_counts[c] + right_counts[c];
        sq_total += t * t;
    }
    return sq_left / n_left + sq_right / n_right - sq_total / (n_left + n_right);
}

Split best_gini_split(const ColumnIndex& index, std::span<const std::uint32_t> rows,
                      std::span<const int> labels, int class_count,
                      std::span<const int> features) {
    const auto width = static_cast<std::size_t>(class_count);
    std::vector<double> total(width, 0.0);
    for (const auto r : rows) total[labels[r]] += 1.0;
    std::vector<double> left(width);
    std::vector<double> right(width);
    Split best;
    best.gain = 0.0;
    GroupScanner scan;
    for (const int f : sorted_unique(features)) {
        scan.gather(index, static_cast<std::size_t>(f), rows, width,
                    [&](double* s, std::uint32_t r) { s[labels[r]] += 1.0; });
        std::fill(left.begin(), left.end(), 0.0);
        for (std::size_t k = 0; k + 1 < scan.groups(); ++k) {
            const double* s = scan.stats(k, width);
            for (std::size_t c = 0; c < width; ++c) {
                left[c] += s[c];
                right[c] = total[c] - left[c];
            }
            const double gain = gini_decrease(left, right);
            if (improves(gain, best.gain)) {
                best.feature = f;
                best.gain = gain;
                best.threshold = midpoint(index.value(f, scan.rank(k)), index.value(f, scan.rank(k + 1)));
            }
        }
    }
    return best;
}

namespace {

class GiniGrower {
public:
    GiniGrower(const ColumnIndex& index, std::span<const int> labels, int class_count,
               int max_depth, const NodeSampler& sampler, std::vector<NodeTrace>* trace)
        : index_(index), labels_(labels), class_count_(class_count), max_depth_(max_depth),
          sampler_(sampler), trace_(trace) {}

    int grow(std::span<const std::uint32_t> rows, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        std::vector<double> counts(static_cast<std::size_t>(class_count_), 0.0);
        for (const auto r : rows) counts[labels_[r]] += 1.0;
        const bool pure =
            std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
        Split split;
        std::vector<int> features;
        if (!pure && depth < max_depth_ && rows.size() >= 2) {
            features = sampler_(id);
            split = best_gini_split(index_, rows, labels_, class_count_, features);
        }
        if (trace_)
            trace_->push_back({depth, {rows.begin(), rows.end()}, features, split});
        if (!split.valid()) {
            const double n = static_cast<double>(rows.size());
            for (auto& c : counts) c /= n;
            nodes_[id].leaf = std::move(counts);
            return id;
        }
        std::vector<std::uint32_t> left;
        std::vector<std::uint32_t> right;
        partition_rows(index_, rows, split, left, right);
        nodes_[id].feature = split.feature;
        nodes_[id].threshold = split.threshold;
        nodes_[id].gain = split.gain;
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    DecisionTree finish() { return DecisionTree(std::move(nodes_)); }

private:
    const ColumnIndex& index_;
    std::span<const int> labels_;
    int class_count_;
    int max_depth_;
    const NodeSampler& sampler_;
    std::vector<NodeTrace>* trace_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTree grow_gini_tree(const ColumnIndex& index, std::span<const std::uint32_t> rows,
                            std::span<const int> labels, int class_count, int max_depth,
                            const NodeSampler& features, std::vector<NodeTrace>* trace) {
    if (rows.empty()) throw Error("cannot grow a tree on zero rows");
    GiniGrower grower(index, labels, class_count, max_depth, features, trace);
    grower.grow(rows, 0);
    return grower.finish();
}

}  // namespace learner
}  // namespace bettiml
