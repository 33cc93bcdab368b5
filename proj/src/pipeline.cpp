#include "bettiml/pipeline.hpp"

#include <fstream>
#include <tuple>

#include "bettiml/error.hpp"
#include "bettiml/rng.hpp"

namespace bettiml {

namespace fs = std::filesystem;

StageSeeds stage_seeds(std::uint64_t seed) {
    return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3), derive_seed(seed, 4)};
}

void PipelineConfig::validate() const {
    if (manifest.empty()) throw Error("no manifest given");
    bettiml::validate(features.grid);
    if (features.bins < 1 || features.bins > features.grid.count)
        throw Error("bins must lie in [1, number of thresholds]");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error("train fraction must lie in (0, 1)");
    booster.validate();
    forest.validate();
}

std::vector<std::string> sample_ids(const fs::path& manifest,
                                    std::span<const ManifestEntry> entries) {
    const fs::path base = manifest.parent_path();
    std::vector<std::string> ids;
    ids.reserve(entries.size());
    for (const auto& e : entries) {
        fs::path p = base.empty() ? e.image_path : e.image_path.lexically_relative(base);
        if (p.empty()) p = e.image_path;
        ids.push_back(p.generic_string());
    }
    return ids;
}

Dataset run_extract(const fs::path& manifest, const FeatureOptions& opts, int workers,
                    const fs::path& out_csv) {
    const auto entries = read_manifest(manifest);
    const auto features = extract_batch(entries, opts, workers);
    const auto ids = sample_ids(manifest, entries);
    Dataset d = features.empty() ? Dataset(betti_feature_names(opts.bins))
                                 : make_dataset(features, ids);
    if (!out_csv.empty()) write_features(d, out_csv);
    return d;
}

std::pair<Dataset, Dataset> run_split(const Dataset& all, const SplitSpec& spec,
                                      const fs::path& out_dir) {
    const auto idx = split_indices(all.labels(), spec);
    auto parts = std::make_pair(all.select_rows(idx.train), all.select_rows(idx.test));
    if (!out_dir.empty()) {
        write_split_csv(out_dir / artifacts::split, all, idx);
        write_features(parts.first, out_dir / artifacts::train);
        write_features(parts.second, out_dir / artifacts::test);
    }
    return parts;
}

SelectionReport run_select(const Dataset& train, const Dataset& eval, const BoosterConfig& cfg,
                           bool holdout, const SplitSpec& holdout_spec, int workers,
                           const fs::path& out_csv) {
    SelectionReport report;
    if (holdout) {
        const auto [fit, validation] = split(train, holdout_spec);
        report = threshold_sweep(fit, validation, cfg, workers);
    } else {
        report = threshold_sweep(train, eval, cfg, workers);
    }
    if (!out_csv.empty()) {
        write_selection_csv(out_csv, report);
        std::ofstream names(out_csv.parent_path() / artifacts::selected, std::ios::binary);
        if (!names) throw Error("cannot write selected feature list");
        for (auto j : report.chosen_mask) names << train.feature_names()[j] << '\n';
    }
    return report;
}

TreeEnsembleModel run_train(const Dataset& train, ModelKind kind, const BoosterConfig& booster,
                            const ForestConfig& forest, int workers, const fs::path& out_model) {
    auto model = kind == ModelKind::boosted ? train_boosted(train, booster, workers)
                                            : train_forest(train, forest, workers);
    if (!out_model.empty()) save_model(model, out_model);
    return model;
}

MetricsReport run_evaluate(const TreeEnsembleModel& model, const Dataset& test,
                           const fs::path& out_dir) {
    auto report = evaluate_model(model, test);
    if (!out_dir.empty()) {
        write_metrics_json(out_dir / artifacts::metrics, report);
        write_roc_csv(out_dir / artifacts::roc, report.roc);
    }
    return report;
}

void run_exports(const Dataset& all, const fs::path& out_dir) {
    if (all.rows() >= 2) {
        const std::size_t k = std::min<std::size_t>({3, all.rows() - 1, all.cols()});
        write_pca_csv(out_dir / artifacts::pca, all, pca_project(all.values(), all.rows(), all.cols(), k));
    }
    if (all.empty()) return;
    std::vector<std::pair<std::string, Dataset>> sets;
    for (const auto& [name, prefix] : {std::pair{"betti0", "b0_"}, std::pair{"betti1", "b1_"}}) {
        const auto cols = all.columns_with_prefix(prefix);
        if (!cols.empty()) sets.emplace_back(name, all.select_columns(cols));
    }
    if (sets.empty()) sets.emplace_back("all", all);
    write_distribution_csv(out_dir / artifacts::distribution, sets);
}

std::vector<std::string> read_feature_list(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) names.push_back(line);
    }
    if (names.empty()) throw Error("feature list " + path.string() + " is empty");
    return names;
}

namespace {

template <typename F>
auto stage(const char* name, F&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        throw Error(std::string(name) + ": " + e.what());
    }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw Error("setup: cannot create " + cfg.out_dir.string() + ": " + ec.message());

    const auto seeds = stage_seeds(cfg.seed);
    BoosterConfig booster = cfg.booster;
    booster.seed = seeds.booster;
    ForestConfig forest = cfg.forest;
    forest.seed = seeds.forest;

    PipelineResult r;
    r.features = stage("extract", [&] {
        return run_extract(cfg.manifest, cfg.features, cfg.workers, cfg.out_dir / artifacts::features);
    });
    std::tie(r.train, r.test) = stage("split", [&] {
        return run_split(r.features, {cfg.train_fraction, seeds.split, cfg.stratified}, cfg.out_dir);
    });

    Dataset train = r.train;
    Dataset test = r.test;
    if (cfg.select) {
        const auto report = stage("select", [&] {
            return run_select(r.train, r.test, booster, cfg.holdout,
                              {cfg.train_fraction, seeds.holdout, cfg.stratified}, cfg.workers,
                              cfg.out_dir / artifacts::selection);
        });
        train = r.train.select_columns(report.chosen_mask);
        test = r.test.select_columns(report.chosen_mask);
    }
    r.selected_features = train.feature_names();

    r.model = stage("train", [&] {
        return run_train(train, cfg.model, booster, forest, cfg.workers, cfg.out_dir / artifacts::model);
    });
    r.metrics = stage("evaluate", [&] { return run_evaluate(r.model, test, cfg.out_dir); });
    stage("export", [&] {
        run_exports(r.features, cfg.out_dir);
        return 0;
    });
    return r;
}

}  // namespace bettiml
