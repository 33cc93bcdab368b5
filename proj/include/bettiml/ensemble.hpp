#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bettiml/dataset.hpp"
#include "bettiml/tree.hpp"

namespace bettiml {

struct BoosterConfig {
    int n_estimators = 1000;
    int max_depth = 25;
    double learning_rate = 0.1;
    double colsample_bytree = 0.4;
    double colsample_bylevel = 0.4;
    double l2_lambda = 1.0;
    double min_child_weight = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const BoosterConfig&) const = default;
};

struct ForestConfig {
    int n_trees = 500;
    int max_depth = 25;
    int features_per_split = 0;  // 0 selects floor(sqrt(D))
    bool bootstrap = true;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const ForestConfig&) const = default;
};

enum class ModelKind { boosted, forest };

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);

using ClassProbabilities = std::array<double, kClassCount>;

/// Immutable once trained. Boosted models store n_estimators * class_count
/// regression trees in round-major order; forests store class-distribution trees.
struct TreeEnsembleModel {
    ModelKind kind = ModelKind::boosted;
    int class_count = kClassCount;
    std::vector<std::string> feature_names;
    BoosterConfig booster;
    ForestConfig forest;
    std::array<double, kClassCount> base_margin{};  // boosted only
    std::vector<DecisionTree> trees;

    std::size_t n_features() const { return feature_names.size(); }
    bool operator==(const TreeEnsembleModel&) const = default;
};

/// Softmax Newton boosting. Margins start at the log class priors of the
/// training labels (floored at 1e-6); each round grows one tree per class on
/// g = p - y, h = p(1 - p). `workers` only affects speed.
TreeEnsembleModel train_boosted(const Dataset& train, const BoosterConfig& cfg, int workers = 1);

TreeEnsembleModel train_forest(const Dataset& train, const ForestConfig& cfg, int workers = 1);

ClassProbabilities predict_proba(const TreeEnsembleModel& m, std::span<const double> x);

/// Raw boosted margins before the softmax.
ClassProbabilities predict_margin(const TreeEnsembleModel& m, std::span<const double> x);

int predict_class(const TreeEnsembleModel& m, std::span<const double> x);

/// Probabilities for every row of `d`, whose columns must match the model's
/// feature names (extra columns are ignored, missing ones are an error).
std::vector<ClassProbabilities> predict_dataset(const TreeEnsembleModel& m, const Dataset& d);

/// Total split gain per feature, normalized to sum 1 (all zeros when the
/// model has no splits).
std::vector<double> feature_importance(const TreeEnsembleModel& m);

/// Mean multiclass log-loss of the model on `d`.
double log_loss(const TreeEnsembleModel& m, const Dataset& d);

void save_model(const TreeEnsembleModel& m, const std::filesystem::path& path);
TreeEnsembleModel load_model(const std::filesystem::path& path);
std::string model_to_json(const TreeEnsembleModel& m);
TreeEnsembleModel model_from_json(const std::string& text);

namespace detail {
/// Sorted sample of ceil(fraction * |pool|) features drawn without replacement.
std::vector<int> sample_features(std::span<const int> pool, double fraction, std::uint64_t seed);
}  // namespace detail

}  // namespace bettiml
