#include "bettiml/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "bettiml/error.hpp"
#include "bettiml/rng.hpp"
#include "parallel.hpp"

namespace bettiml {

using nlohmann::json;

namespace {
// Stream tags for derive_seed.
constexpr std::uint64_t kTreeColumns = 0x7431;
constexpr std::uint64_t kLevelColumns = 0x6c31;
constexpr std::uint64_t kForestTree = 0x6631;
}  // namespace

void BoosterConfig::validate() const {
    if (n_estimators < 1) throw Error("n_estimators must be >= 1");
    if (max_depth < 0) throw Error("max_depth must be >= 0");
    if (!(learning_rate > 0.0)) throw Error("learning_rate must be > 0");
    if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0) ||
        !(colsample_bylevel > 0.0 && colsample_bylevel <= 1.0))
        throw Error("colsample fractions must lie in (0, 1]");
    if (l2_lambda < 0.0 || min_child_weight < 0.0)
        throw Error("l2_lambda and min_child_weight must be >= 0");
}

void ForestConfig::validate() const {
    if (n_trees < 1) throw Error("n_trees must be >= 1");
    if (max_depth < 0) throw Error("max_depth must be >= 0");
    if (features_per_split < 0) throw Error("features_per_split must be >= 0");
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "boosted") return ModelKind::boosted;
    if (name == "forest") return ModelKind::forest;
    throw Error("unknown model kind '" + name + "' (expected boosted|forest)");
}

std::string to_string(ModelKind kind) { return kind == ModelKind::boosted ? "boosted" : "forest"; }

namespace detail {

std::vector<int> sample_features(std::span<const int> pool, double fraction, std::uint64_t seed) {
    std::vector<int> items(pool.begin(), pool.end());
    const auto k = std::min(items.size(), static_cast<std::size_t>(std::ceil(
                                              fraction * static_cast<double>(items.size()) - 1e-9)));
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.below(items.size() - i);
        std::swap(items[i], items[j]);
    }
    items.resize(std::max<std::size_t>(k, 1));
    std::sort(items.begin(), items.end());
    return items;
}

}  // namespace detail

namespace {

void check_trainable(const Dataset& d) {
    if (d.empty()) throw Error("cannot train on an empty dataset");
    if (d.cols() == 0) throw Error("cannot train on a dataset without features");
    for (double v : d.values())
        if (std::isnan(v)) throw Error("training features contain NaN");
}

void softmax(ClassProbabilities& z) {
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (auto& v : z) {
        v = std::exp(v - top);
        total += v;
    }
    for (auto& v : z) v /= total;
}

}  // namespace

TreeEnsembleModel train_boosted(const Dataset& train, const BoosterConfig& cfg, int workers) {
    cfg.validate();
    check_trainable(train);
    const std::size_t n = train.rows();
    const std::size_t dims = train.cols();
    constexpr int K = kClassCount;

    TreeEnsembleModel model;
    model.kind = ModelKind::boosted;
    model.feature_names = train.feature_names();
    model.booster = cfg;
    const auto counts = train.class_counts();
    for (int c = 0; c < K; ++c)
        model.base_margin[c] =
            std::log(std::max(static_cast<double>(counts[c]) / static_cast<double>(n), 1e-6));

    const learner::ColumnIndex index(train.values(), n, dims);
    std::vector<std::uint32_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0u);
    std::vector<int> all_features(dims);
    std::iota(all_features.begin(), all_features.end(), 0);

    const learner::GradientTreeParams params{cfg.max_depth, cfg.l2_lambda, cfg.min_child_weight,
                                             cfg.learning_rate};
    std::vector<ClassProbabilities> margin(n, model.base_margin);
    std::vector<std::vector<double>> grad(K, std::vector<double>(n));
    std::vector<std::vector<double>> hess(K, std::vector<double>(n));
    model.trees.resize(static_cast<std::size_t>(cfg.n_estimators) * K);
    const int threads = std::min(detail::resolve_workers(workers), K);

    for (int round = 0; round < cfg.n_estimators; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            ClassProbabilities p = margin[i];
            softmax(p);
            for (int c = 0; c < K; ++c) {
                const double y = train.label(i) == c ? 1.0 : 0.0;
                grad[c][i] = p[c] - y;
                hess[c][i] = std::max(p[c] * (1.0 - p[c]), 1e-16);
            }
        }
#pragma omp parallel for schedule(static, 1) num_threads(threads) if (threads > 1)
        for (int c = 0; c < K; ++c) {
            const auto tree_seed = derive_seed(cfg.seed, kTreeColumns, static_cast<std::uint64_t>(round),
                                               static_cast<std::uint64_t>(c));
            const auto tree_features =
                detail::sample_features(all_features, cfg.colsample_bytree, tree_seed);
            const learner::LevelSampler sampler = [&](int depth) {
                return detail::sample_features(
                    tree_features, cfg.colsample_bylevel,
                    derive_seed(tree_seed, kLevelColumns, static_cast<std::uint64_t>(depth)));
            };
            model.trees[static_cast<std::size_t>(round) * K + c] =
                learner::grow_gradient_tree(index, all_rows, grad[c], hess[c], sampler, params);
        }
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < K; ++c)
                margin[i][c] +=
                    model.trees[static_cast<std::size_t>(round) * K + c].leaf_for(train.row(i))[0];
    }
    return model;
}

TreeEnsembleModel train_forest(const Dataset& train, const ForestConfig& cfg, int workers) {
    cfg.validate();
    check_trainable(train);
    const std::size_t n = train.rows();
    const std::size_t dims = train.cols();

    TreeEnsembleModel model;
    model.kind = ModelKind::forest;
    model.feature_names = train.feature_names();
    model.forest = cfg;
    model.trees.resize(static_cast<std::size_t>(cfg.n_trees));

    const learner::ColumnIndex index(train.values(), n, dims);
    const int per_split = cfg.features_per_split > 0
                              ? std::min<int>(cfg.features_per_split, static_cast<int>(dims))
                              : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(dims))));
    std::vector<int> all_features(dims);
    std::iota(all_features.begin(), all_features.end(), 0);
    const double fraction = static_cast<double>(per_split) / static_cast<double>(dims);
    const auto& labels = train.labels();
    const int threads = detail::resolve_workers(workers);

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1)
    for (int t = 0; t < cfg.n_trees; ++t) {
        const auto tree_seed = derive_seed(cfg.seed, kForestTree, static_cast<std::uint64_t>(t));
        Rng rng(tree_seed);
        std::vector<std::uint32_t> rows(n);
        if (cfg.bootstrap) {
            for (auto& r : rows) r = static_cast<std::uint32_t>(rng.below(n));
            std::sort(rows.begin(), rows.end());
        } else {
            std::iota(rows.begin(), rows.end(), 0u);
        }
        const learner::NodeSampler sampler = [&](int node_id) {
            return detail::sample_features(all_features, fraction,
                                           derive_seed(tree_seed, static_cast<std::uint64_t>(node_id)));
        };
        model.trees[t] = learner::grow_gini_tree(index, rows, labels, kClassCount, cfg.max_depth,
                                                 sampler);
    }
    return model;
}

ClassProbabilities predict_margin(const TreeEnsembleModel& m, std::span<const double> x) {
    if (x.size() != m.n_features())
        throw Error("feature dimension mismatch: got " + std::to_string(x.size()) + ", model expects " +
                    std::to_string(m.n_features()));
    if (m.kind != ModelKind::boosted) throw Error("predict_margin requires a boosted model");
    ClassProbabilities z = m.base_margin;
    for (std::size_t t = 0; t < m.trees.size(); ++t) z[t % kClassCount] += m.trees[t].leaf_for(x)[0];
    return z;
}

ClassProbabilities predict_proba(const TreeEnsembleModel& m, std::span<const double> x) {
    if (m.trees.empty()) throw Error("model has no trees");
    if (m.kind == ModelKind::boosted) {
        ClassProbabilities z = predict_margin(m, x);
        softmax(z);
        return z;
    }
    if (x.size() != m.n_features())
        throw Error("feature dimension mismatch: got " + std::to_string(x.size()) + ", model expects " +
                    std::to_string(m.n_features()));
    ClassProbabilities p{};
    for (const auto& tree : m.trees) {
        const auto& leaf = tree.leaf_for(x);
        for (int c = 0; c < kClassCount; ++c) p[c] += leaf[c];
    }
    for (auto& v : p) v /= static_cast<double>(m.trees.size());
    return p;
}

int predict_class(const TreeEnsembleModel& m, std::span<const double> x) {
    const auto p = predict_proba(m, x);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::vector<ClassProbabilities> predict_dataset(const TreeEnsembleModel& m, const Dataset& d) {
    const Dataset view =
        d.feature_names() == m.feature_names ? d : d.select_columns_by_name(m.feature_names);
    std::vector<ClassProbabilities> out(view.rows());
    for (std::size_t i = 0; i < view.rows(); ++i) out[i] = predict_proba(m, view.row(i));
    return out;
}

std::vector<double> feature_importance(const TreeEnsembleModel& m) {
    if (m.trees.empty()) throw Error("feature_importance: model is untrained");
    std::vector<double> score(m.n_features(), 0.0);
    for (const auto& tree : m.trees)
        for (const auto& node : tree.nodes())
            if (!node.is_leaf()) score[node.feature] += node.gain;
    const double total = std::accumulate(score.begin(), score.end(), 0.0);
    if (total > 0.0)
        for (auto& s : score) s /= total;
    return score;
}

double log_loss(const TreeEnsembleModel& m, const Dataset& d) {
    const auto proba = predict_dataset(m, d);
    double total = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i)
        total -= std::log(std::max(proba[i][d.label(i)], 1e-300));
    return total / static_cast<double>(d.rows());
}

// ---- serialization ----

namespace {

json tree_to_json(const DecisionTree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes()) {
        if (n.is_leaf())
            nodes.push_back({{"leaf", n.leaf}});
        else
            nodes.push_back({{"feat", n.feature},
                             {"thr", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"gain", n.gain}});
    }
    return {{"nodes", std::move(nodes)}};
}

DecisionTree tree_from_json(const json& j) {
    std::vector<TreeNode> nodes;
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        if (n.contains("leaf")) {
            node.leaf = n.at("leaf").get<std::vector<double>>();
        } else {
            node.feature = n.at("feat").get<int>();
            node.threshold = n.at("thr").get<double>();
            node.left = n.at("left").get<int>();
            node.right = n.at("right").get<int>();
            node.gain = n.value("gain", 0.0);
        }
        nodes.push_back(std::move(node));
    }
    return DecisionTree(std::move(nodes));
}

}  // namespace

std::string model_to_json(const TreeEnsembleModel& m) {
    json config;
    if (m.kind == ModelKind::boosted) {
        const auto& c = m.booster;
        config = {{"n_estimators", c.n_estimators},
                  {"max_depth", c.max_depth},
                  {"learning_rate", c.learning_rate},
                  {"colsample_bytree", c.colsample_bytree},
                  {"colsample_bylevel", c.colsample_bylevel},
                  {"l2_lambda", c.l2_lambda},
                  {"min_child_weight", c.min_child_weight},
                  {"seed", c.seed}};
    } else {
        const auto& c = m.forest;
        config = {{"n_trees", c.n_trees},
                  {"max_depth", c.max_depth},
                  {"features_per_split", c.features_per_split},
                  {"bootstrap", c.bootstrap},
                  {"seed", c.seed}};
    }
    json trees = json::array();
    for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
    json j = {{"kind", to_string(m.kind)},
              {"config", std::move(config)},
              {"class_count", m.class_count},
              {"feature_names", m.feature_names},
              {"trees", std::move(trees)}};
    if (m.kind == ModelKind::boosted) j["base_margin"] = m.base_margin;
    return j.dump();
}

TreeEnsembleModel model_from_json(const std::string& text) {
    TreeEnsembleModel m;
    try {
        const json j = json::parse(text);
        m.kind = parse_model_kind(j.at("kind").get<std::string>());
        m.class_count = j.at("class_count").get<int>();
        if (m.class_count != kClassCount) throw Error("unsupported class_count");
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        const auto& c = j.at("config");
        if (m.kind == ModelKind::boosted) {
            auto& b = m.booster;
            b.n_estimators = c.at("n_estimators").get<int>();
            b.max_depth = c.at("max_depth").get<int>();
            b.learning_rate = c.at("learning_rate").get<double>();
            b.colsample_bytree = c.at("colsample_bytree").get<double>();
            b.colsample_bylevel = c.at("colsample_bylevel").get<double>();
            b.l2_lambda = c.at("l2_lambda").get<double>();
            b.min_child_weight = c.at("min_child_weight").get<double>();
            b.seed = c.at("seed").get<std::uint64_t>();
            m.base_margin = j.at("base_margin").get<std::array<double, kClassCount>>();
        } else {
            auto& f = m.forest;
            f.n_trees = c.at("n_trees").get<int>();
            f.max_depth = c.at("max_depth").get<int>();
            f.features_per_split = c.at("features_per_split").get<int>();
            f.bootstrap = c.at("bootstrap").get<bool>();
            f.seed = c.at("seed").get<std::uint64_t>();
        }
        for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    } catch (const json::exception& e) {
        throw Error(std::string("malformed model file: ") + e.what());
    }
    const std::size_t width = m.kind == ModelKind::boosted ? 1 : kClassCount;
    for (const auto& t : m.trees)
        if (!t.well_formed(m.n_features(), width)) throw Error("malformed tree in model file");
    return m;
}

void save_model(const TreeEnsembleModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << model_to_json(m) << '\n';
}

TreeEnsembleModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return model_from_json(text);
}

}  // namespace bettiml
