// bettiml: command-line front end for the Betti-curve classification pipeline.
//
//   bettiml synth     --out-dir data --per-class 200
//   bettiml extract   --manifest data/manifest.csv --out features.csv
//   bettiml split     --features features.csv --out-dir run
//   bettiml select    --train run/train.csv --test run/test.csv --out-dir run
//   bettiml train     --train run/train.csv --out run/model.json
//   bettiml evaluate  --model run/model.json --test run/test.csv --out-dir run
//   bettiml pipeline  --manifest data/manifest.csv --out-dir run
//
// Every subcommand takes --config <file.json>; flags given on the command
// line win over keys in the file. Keys are flag names without the leading
// dashes (e.g. "colsample-tree" or "colsample_tree").

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "bettiml/dataset.hpp"
#include "bettiml/ensemble.hpp"
#include "bettiml/error.hpp"
#include "bettiml/evaluation.hpp"
#include "bettiml/persistence.hpp"
#include "bettiml/pipeline.hpp"
#include "bettiml/selection.hpp"
#include "bettiml/synthgen.hpp"

namespace fs = std::filesystem;
using namespace bettiml;

namespace {

// Fills options that were not given on the command line from a JSON object.
void apply_config(CLI::App& cmd, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed config " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw Error("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        CLI::Option* opt = nullptr;
        try {
            opt = cmd.get_option("--" + flag);
        } catch (const CLI::OptionNotFound&) {
            throw Error("unknown config key '" + key + "'");
        }
        if (opt->count() > 0) continue;
        std::string text;
        if (value.is_string())
            text = value.get<std::string>();
        else if (value.is_boolean())
            text = value.get<bool>() ? "true" : "false";
        else
            text = value.dump();
        opt->add_result(text);
        opt->run_callback();
    }
}

struct FeatureFlags {
    int bins = 100;
    std::string agg = "mean";
    int thresholds = 255;
    int threshold_start = 0;

    void add(CLI::App& cmd) {
        cmd.add_option("--bins", bins, "Bins per Betti curve")->capture_default_str();
        cmd.add_option("--agg", agg, "Bin aggregation: mean|sum")->capture_default_str();
        cmd.add_option("--thresholds", thresholds, "Number of integer thresholds")
            ->capture_default_str();
        cmd.add_option("--threshold-start", threshold_start, "First threshold")
            ->capture_default_str();
    }
    FeatureOptions resolve() const {
        FeatureOptions o;
        o.bins = bins;
        o.agg = parse_aggregation(agg);
        o.grid = {threshold_start, thresholds};
        validate(o.grid);
        return o;
    }
};

struct ModelFlags {
    std::string model = "boosted";
    BoosterConfig booster;
    ForestConfig forest;

    void add(CLI::App& cmd, bool with_kind) {
        if (with_kind)
            cmd.add_option("--model", model, "boosted|forest")->capture_default_str();
        cmd.add_option("--rounds", booster.n_estimators, "Boosting rounds")->capture_default_str();
        cmd.add_option("--depth", booster.max_depth, "Maximum tree depth (boosted)")
            ->capture_default_str();
        cmd.add_option("--lr", booster.learning_rate, "Learning rate")->capture_default_str();
        cmd.add_option("--colsample-tree", booster.colsample_bytree, "Column fraction per tree")
            ->capture_default_str();
        cmd.add_option("--colsample-level", booster.colsample_bylevel, "Column fraction per level")
            ->capture_default_str();
        cmd.add_option("--lambda", booster.l2_lambda, "L2 leaf regularization")
            ->capture_default_str();
        cmd.add_option("--min-child-weight", booster.min_child_weight, "Minimum child hessian")
            ->capture_default_str();
        if (with_kind) {
            cmd.add_option("--trees", forest.n_trees, "Forest size")->capture_default_str();
            cmd.add_option("--forest-depth", forest.max_depth, "Maximum tree depth (forest)")
                ->capture_default_str();
            cmd.add_option("--features-per-split", forest.features_per_split,
                           "Forest candidates per node (0 = sqrt(D))")
                ->capture_default_str();
        }
    }
};

fs::path ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cubical persistent homology features and tree-ensemble classification"};
    app.require_subcommand(1);
    std::map<CLI::App*, fs::path> configs;
    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", configs[cmd], "JSON file with default flag values");
    };

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic topology-labelled image set");
    SynthSpec synth_spec;
    fs::path synth_out = "synthetic";
    int synth_per_class = 200;
    std::vector<int> synth_counts;
    int synth_size = 64;
    int synth_workers = 1;
    synth->add_option("--out-dir", synth_out)->capture_default_str();
    synth->add_option("--per-class", synth_per_class, "Images per class")->capture_default_str();
    synth->add_option("--counts", synth_counts, "Explicit per-class counts (4 values)")
        ->expected(4)
        ->delimiter(',');
    synth->add_option("--size", synth_size, "Image side length")->capture_default_str();
    synth->add_option("--noise", synth_spec.noise_amplitude, "Noise amplitude")
        ->capture_default_str();
    synth->add_option("--seed", synth_spec.seed)->capture_default_str();
    synth->add_option("--workers", synth_workers)->capture_default_str();
    add_config(synth);

    // extract
    auto* extract = app.add_subcommand("extract", "Betti-curve features for every manifest image");
    fs::path extract_manifest;
    fs::path extract_out = "features.csv";
    fs::path diagrams_dir;
    FeatureFlags extract_features_flags;
    int extract_workers = 1;
    extract->add_option("--manifest", extract_manifest)->required();
    extract->add_option("--out", extract_out)->capture_default_str();
    extract_features_flags.add(*extract);
    extract->add_option("--workers", extract_workers)->capture_default_str();
    extract->add_option("--diagrams-dir", diagrams_dir, "Also dump per-image diagrams here");
    add_config(extract);

    // split
    auto* split_cmd = app.add_subcommand("split", "Stratified train/test split of a features file");
    fs::path split_features;
    fs::path split_out = ".";
    double split_fraction = 0.9;
    bool split_stratified = true;
    std::uint64_t split_seed = 0;
    split_cmd->add_option("--features", split_features)->required();
    split_cmd->add_option("--out-dir", split_out)->capture_default_str();
    split_cmd->add_option("--split", split_fraction, "Train fraction")->capture_default_str();
    split_cmd->add_flag("--stratified,!--no-stratified", split_stratified);
    split_cmd->add_option("--seed", split_seed)->capture_default_str();
    add_config(split_cmd);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a boosted model or random forest");
    fs::path train_path;
    fs::path train_out = "model.json";
    fs::path train_feature_list;
    ModelFlags train_flags;
    std::uint64_t train_seed = 0;
    int train_workers = 1;
    train_cmd->add_option("--train", train_path)->required();
    train_cmd->add_option("--out", train_out)->capture_default_str();
    train_cmd->add_option("--feature-list", train_feature_list,
                          "Restrict to the named features (one per line)");
    train_flags.add(*train_cmd, true);
    train_cmd->add_option("--seed", train_seed)->capture_default_str();
    train_cmd->add_option("--workers", train_workers)->capture_default_str();
    add_config(train_cmd);

    // select
    auto* select_cmd = app.add_subcommand("select", "Importance-threshold feature selection sweep");
    fs::path select_train;
    fs::path select_test;
    fs::path select_out = ".";
    ModelFlags select_flags;
    bool select_holdout = false;
    double select_fraction = 0.9;
    std::uint64_t select_seed = 0;
    int select_workers = 1;
    select_cmd->add_option("--train", select_train)->required();
    select_cmd->add_option("--test", select_test)->required();
    select_cmd->add_option("--out-dir", select_out)->capture_default_str();
    select_flags.add(*select_cmd, false);
    select_cmd->add_flag("--holdout", select_holdout,
                         "Score subsets on a validation split of the training data");
    select_cmd->add_option("--split", select_fraction, "Train fraction for --holdout")
        ->capture_default_str();
    select_cmd->add_option("--seed", select_seed)->capture_default_str();
    select_cmd->add_option("--workers", select_workers)->capture_default_str();
    add_config(select_cmd);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Metrics, confusion matrix and ROC export");
    fs::path eval_model;
    fs::path eval_test;
    fs::path eval_out = ".";
    fs::path eval_all;
    eval_cmd->add_option("--model", eval_model)->required();
    eval_cmd->add_option("--test", eval_test)->required();
    eval_cmd->add_option("--out-dir", eval_out)->capture_default_str();
    eval_cmd->add_option("--features", eval_all, "Full feature file for PCA/distribution exports");
    add_config(eval_cmd);

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "Run extraction through evaluation end to end");
    PipelineConfig pcfg;
    FeatureFlags pipe_features;
    ModelFlags pipe_models;
    pipe->add_option("--manifest", pcfg.manifest);
    pipe->add_option("--out-dir", pcfg.out_dir)->capture_default_str();
    pipe_features.add(*pipe);
    pipe->add_option("--split", pcfg.train_fraction, "Train fraction")->capture_default_str();
    pipe->add_flag("--stratified,!--no-stratified", pcfg.stratified);
    pipe->add_option("--seed", pcfg.seed)->capture_default_str();
    pipe_models.add(*pipe, true);
    pipe->add_flag("--select,!--no-select", pcfg.select);
    pipe->add_flag("--holdout", pcfg.holdout);
    pipe->add_option("--workers", pcfg.workers)->capture_default_str();
    add_config(pipe);

    CLI11_PARSE(app, argc, argv);

    try {
        for (auto& [cmd, path] : configs)
            if (cmd->parsed() && !path.empty()) apply_config(*cmd, path);

        if (synth->parsed()) {
            synth_spec.width = synth_spec.height = synth_size;
            if (!synth_counts.empty())
                std::copy(synth_counts.begin(), synth_counts.end(),
                          synth_spec.per_class_counts.begin());
            else
                synth_spec.per_class_counts.fill(synth_per_class);
            const auto manifest = generate_dataset(synth_spec, synth_out, synth_workers);
            std::cout << "wrote " << manifest.string() << '\n';
        } else if (extract->parsed()) {
            const auto opts = extract_features_flags.resolve();
            if (extract_out.has_parent_path()) ensure_dir(extract_out.parent_path());
            const auto d = run_extract(extract_manifest, opts, extract_workers, extract_out);
            if (!diagrams_dir.empty()) {
                ensure_dir(diagrams_dir);
                const auto entries = read_manifest(extract_manifest);
                for (const auto& e : entries) {
                    const auto f = build_filtration(load_grayscale(e.image_path));
                    write_diagrams_csv(diagrams_dir / (e.image_path.stem().string() + ".csv"),
                                       compute_pd0(f), compute_pd1(f));
                }
            }
            std::cout << "extracted " << d.rows() << " samples -> " << extract_out.string() << '\n';
        } else if (split_cmd->parsed()) {
            const auto all = read_features(split_features);
            const auto [train, test] =
                run_split(all, {split_fraction, stage_seeds(split_seed).split, split_stratified},
                          ensure_dir(split_out));
            std::cout << "train " << train.rows() << ", test " << test.rows() << '\n';
        } else if (train_cmd->parsed()) {
            auto train = read_features(train_path);
            if (!train_feature_list.empty())
                train = train.select_columns_by_name(read_feature_list(train_feature_list));
            const auto seeds = stage_seeds(train_seed);
            train_flags.booster.seed = seeds.booster;
            train_flags.forest.seed = seeds.forest;
            if (train_out.has_parent_path()) ensure_dir(train_out.parent_path());
            run_train(train, parse_model_kind(train_flags.model), train_flags.booster,
                      train_flags.forest, train_workers, train_out);
            std::cout << "model -> " << train_out.string() << '\n';
        } else if (select_cmd->parsed()) {
            const auto seeds = stage_seeds(select_seed);
            select_flags.booster.seed = seeds.booster;
            const auto report = run_select(read_features(select_train), read_features(select_test),
                                           select_flags.booster, select_holdout,
                                           {select_fraction, seeds.holdout, true}, select_workers,
                                           ensure_dir(select_out) / artifacts::selection);
            const auto& best = select_optimal(report.rows);
            std::cout << "tau* = " << best.tau << " (" << best.n_features()
                      << " features, accuracy " << best.accuracy << ")\n";
        } else if (eval_cmd->parsed()) {
            const auto model = load_model(eval_model);
            const auto report = run_evaluate(model, read_features(eval_test), ensure_dir(eval_out));
            if (!eval_all.empty()) run_exports(read_features(eval_all), eval_out);
            std::cout << metrics_json(report) << '\n';
        } else if (pipe->parsed()) {
            pcfg.features = pipe_features.resolve();
            pcfg.model = parse_model_kind(pipe_models.model);
            pcfg.booster = pipe_models.booster;
            pcfg.forest = pipe_models.forest;
            const auto result = run_pipeline(pcfg);
            std::cout << "features " << result.selected_features.size() << ", accuracy "
                      << result.metrics.classification.accuracy << ", macro AUC "
                      << result.metrics.roc.macro_auc << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
