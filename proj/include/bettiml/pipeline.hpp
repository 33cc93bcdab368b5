#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "bettiml/dataset.hpp"
#include "bettiml/ensemble.hpp"
#include "bettiml/evaluation.hpp"
#include "bettiml/selection.hpp"
#include "bettiml/vectorize.hpp"

namespace bettiml {

/// Per-stage seeds, all derived from one top-level seed:
/// split = derive_seed(seed, 1), booster = derive_seed(seed, 2),
/// forest = derive_seed(seed, 3), holdout split = derive_seed(seed, 4).
struct StageSeeds {
    std::uint64_t split;
    std::uint64_t booster;
    std::uint64_t forest;
    std::uint64_t holdout;
};

StageSeeds stage_seeds(std::uint64_t seed);

struct PipelineConfig {
    std::filesystem::path manifest;
    std::filesystem::path out_dir = "out";
    FeatureOptions features;
    double train_fraction = 0.9;
    bool stratified = true;
    std::uint64_t seed = 0;
    ModelKind model = ModelKind::boosted;
    BoosterConfig booster;  // seed field is overwritten from `seed`
    ForestConfig forest;    // likewise
    bool select = true;
    bool holdout = false;
    int workers = 1;

    void validate() const;
};

/// Output file names inside out_dir.
namespace artifacts {
inline constexpr const char* features = "features.csv";
inline constexpr const char* split = "split.csv";
inline constexpr const char* train = "train.csv";
inline constexpr const char* test = "test.csv";
inline constexpr const char* selection = "selection_report.csv";
inline constexpr const char* selected = "selected_features.txt";
inline constexpr const char* model = "model.json";
inline constexpr const char* metrics = "metrics.json";
inline constexpr const char* roc = "roc.csv";
inline constexpr const char* pca = "pca.csv";
inline constexpr const char* distribution = "distribution.csv";
}  // namespace artifacts

/// Ids for manifest entries: image paths relative to the manifest directory.
std::vector<std::string> sample_ids(const std::filesystem::path& manifest,
                                    std::span<const ManifestEntry> entries);

// Individual stages. Each reads and writes only files, so any stage can be
// rerun on its own.
Dataset run_extract(const std::filesystem::path& manifest, const FeatureOptions& opts,
                    int workers, const std::filesystem::path& out_csv);

std::pair<Dataset, Dataset> run_split(const Dataset& all, const SplitSpec& spec,
                                      const std::filesystem::path& out_dir);

/// Sweep on (train, eval). With `holdout`, eval is ignored and a validation
/// split is carved from train with `holdout_spec` instead. Writes the report
/// and, next to it, the chosen feature names one per line.
SelectionReport run_select(const Dataset& train, const Dataset& eval, const BoosterConfig& cfg,
                           bool holdout, const SplitSpec& holdout_spec, int workers,
                           const std::filesystem::path& out_csv);

TreeEnsembleModel run_train(const Dataset& train, ModelKind kind, const BoosterConfig& booster,
                            const ForestConfig& forest, int workers,
                            const std::filesystem::path& out_model);

MetricsReport run_evaluate(const TreeEnsembleModel& model, const Dataset& test,
                           const std::filesystem::path& out_dir);

/// Figure data for the full feature matrix: PCA (3 components) and per-class
/// Betti-0 / Betti-1 distribution summaries.
void run_exports(const Dataset& all, const std::filesystem::path& out_dir);

struct PipelineResult {
    Dataset features;
    Dataset train;
    Dataset test;
    std::vector<std::string> selected_features;
    TreeEnsembleModel model;
    MetricsReport metrics;
};

/// Extract, split, select, train, evaluate. A failing stage raises an Error
/// whose message starts with the stage name; artifacts of earlier stages stay
/// on disk.
PipelineResult run_pipeline(const PipelineConfig& cfg);

std::vector<std::string> read_feature_list(const std::filesystem::path& path);

}  // namespace bettiml
