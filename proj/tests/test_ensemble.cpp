#include <cmath>
#include <set>

#include "doctest.h"

#include "bettiml/ensemble.hpp"
#include "test_support.hpp"

using namespace bettiml;

namespace {

std::vector<std::string> names(std::size_t d) {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < d; ++j) out.push_back("x" + std::to_string(j));
    return out;
}

// Four noisy clusters; feature j carries class information when j < informative.
Dataset clusters(Rng& rng, std::size_t per_class, std::size_t d, std::size_t informative) {
    Dataset out(names(d));
    std::vector<double> x(d);
    for (int c = 0; c < kClassCount; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                const double centre = j < informative ? 3.0 * ((c + j) % kClassCount) : 0.0;
                x[j] = centre + 2.0 * (rng.uniform() - 0.5);
            }
            out.add_row("r" + std::to_string(out.rows()), c, x);
        }
    }
    return out;
}

TreeEnsembleModel truncated(const TreeEnsembleModel& m, int rounds) {
    auto out = m;
    out.booster.n_estimators = rounds;
    out.trees.resize(static_cast<std::size_t>(rounds) * m.class_count);
    return out;
}

BoosterConfig small_booster(int rounds, int depth) {
    BoosterConfig c;
    c.n_estimators = rounds;
    c.max_depth = depth;
    return c;
}

}  // namespace

TEST_CASE("single-class training data is predicted with high confidence") {
    Rng rng(1);
    Dataset d(names(3));
    for (int i = 0; i < 20; ++i) {
        const std::vector<double> x{rng.uniform(), rng.uniform(), rng.uniform()};
        d.add_row("s", 2, x);
    }
    const auto m = train_boosted(d, small_booster(10, 3));
    for (std::size_t i = 0; i < d.rows(); ++i) CHECK(predict_proba(m, d.row(i))[2] >= 0.99);
}

TEST_CASE("1-D separable two-class data") {
    Dataset d(names(1));
    for (double v : {-2.0, -1.0}) d.add_row("n", 0, std::span<const double>(&v, 1));
    for (double v : {1.0, 2.0}) d.add_row("p", 1, std::span<const double>(&v, 1));
    auto cfg = small_booster(20, 1);
    cfg.colsample_bytree = 1.0;
    cfg.colsample_bylevel = 1.0;
    cfg.min_child_weight = 0.0;
    const auto m = train_boosted(d, cfg);
    for (std::size_t i = 0; i < d.rows(); ++i) CHECK(predict_class(m, d.row(i)) == d.label(i));
    // every split made is the boundary split
    for (const auto& t : m.trees)
        if (!t.nodes()[0].is_leaf()) CHECK(t.nodes()[0].threshold == 0.0);
}

TEST_CASE("boosted model structure") {
    Rng rng(2);
    const auto d = clusters(rng, 25, 6, 3);
    auto cfg = small_booster(15, 3);
    const auto m = train_boosted(d, cfg);
    CHECK(m.trees.size() == 60);
    CHECK(m.feature_names == d.feature_names());
    for (const auto& t : m.trees) {
        CHECK(t.well_formed(6, 1));
        CHECK(t.depth() <= 3);
    }
    // column sampling: each tree uses at most ceil(0.4 * 6) = 3 features
    for (const auto& t : m.trees) {
        std::set<int> used;
        for (const auto& n : t.nodes())
            if (!n.is_leaf()) used.insert(n.feature);
        CHECK(used.size() <= 3);
    }
    double acc = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) acc += predict_class(m, d.row(i)) == d.label(i);
    CHECK(acc / d.rows() > 0.9);
}

TEST_CASE("training log-loss never increases with full column sampling") {
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto d = clusters(rng, 15, 4, 2);
        auto cfg = small_booster(30, 3);
        cfg.colsample_bytree = 1.0;
        cfg.colsample_bylevel = 1.0;
        cfg.seed = trial;
        const auto m = train_boosted(d, cfg);
        double prev = log_loss(truncated(m, 1), d);
        for (int r = 2; r <= 30; ++r) {
            const double cur = log_loss(truncated(m, r), d);
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("probabilities are normalized") {
    Rng rng(4);
    const auto d = clusters(rng, 10, 5, 2);
    const auto boosted = train_boosted(d, small_booster(10, 3));
    ForestConfig fc;
    fc.n_trees = 15;
    fc.max_depth = 5;
    const auto forest = train_forest(d, fc);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> x(5);
        for (auto& v : x) v = 20.0 * (rng.uniform() - 0.5);
        for (const auto* m : {&boosted, &forest}) {
            const auto p = predict_proba(*m, x);
            double s = 0;
            for (double v : p) {
                CHECK(v >= 0.0);
                s += v;
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("forest examples") {
    SUBCASE("single sample") {
        Dataset d(names(2));
        const std::vector<double> x{1.0, 2.0};
        d.add_row("only", 3, x);
        ForestConfig fc;
        fc.n_trees = 3;
        const auto m = train_forest(d, fc);
        CHECK(predict_class(m, x) == 3);
        CHECK(predict_proba(m, x)[3] == 1.0);
    }
    SUBCASE("unanimous vote") {
        TreeEnsembleModel m;
        m.kind = ModelKind::forest;
        m.feature_names = names(1);
        TreeNode leaf;
        leaf.leaf = {0, 0, 1, 0};
        m.trees.assign(4, DecisionTree({leaf}));
        const std::vector<double> x{0.0};
        CHECK(predict_proba(m, x) == ClassProbabilities{0, 0, 1, 0});
    }
    SUBCASE("determinism and accuracy") {
        Rng rng(5);
        const auto d = clusters(rng, 20, 6, 3);
        ForestConfig fc;
        fc.n_trees = 20;
        fc.max_depth = 8;
        fc.seed = 9;
        const auto a = train_forest(d, fc);
        CHECK(a == train_forest(d, fc));
        CHECK(a.trees.size() == 20);
        for (const auto& t : a.trees) CHECK(t.well_formed(6, 4));
        fc.seed = 10;
        CHECK_FALSE(a == train_forest(d, fc));
        double acc = 0;
        for (std::size_t i = 0; i < d.rows(); ++i) acc += predict_class(a, d.row(i)) == d.label(i);
        CHECK(acc / d.rows() > 0.9);
    }
}

TEST_CASE("models do not depend on the worker count") {
    Rng rng(6);
    const auto d = clusters(rng, 20, 8, 4);
    const auto b1 = train_boosted(d, small_booster(10, 4), 1);
    ForestConfig fc;
    fc.n_trees = 12;
    fc.max_depth = 6;
    const auto f1 = train_forest(d, fc, 1);
    for (int w : {2, 3, 8}) {
        CHECK(train_boosted(d, small_booster(10, 4), w) == b1);
        CHECK(train_forest(d, fc, w) == f1);
    }
}

TEST_CASE("feature importance") {
    SUBCASE("one split") {
        TreeEnsembleModel m;
        m.feature_names = names(3);
        TreeNode root;
        root.feature = 1;
        root.threshold = 0.5;
        root.left = 1;
        root.right = 2;
        root.gain = 3.0;
        TreeNode leaf;
        leaf.leaf = {0.0};
        m.booster.n_estimators = 1;
        m.trees.assign(4, DecisionTree({leaf}));
        m.trees[0] = DecisionTree({root, leaf, leaf});
        CHECK(feature_importance(m) == std::vector<double>{0.0, 1.0, 0.0});
    }
    SUBCASE("no splits") {
        Dataset d(names(2));
        const std::vector<double> x{1.0, 1.0};
        for (int i = 0; i < 4; ++i) d.add_row("s", i, x);
        const auto m = train_boosted(d, small_booster(3, 2));
        CHECK(feature_importance(m) == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("constant column gets no importance") {
        Rng rng(7);
        auto d = clusters(rng, 20, 4, 4);
        d.append_constant_column("const", 1.0);
        const auto imp = feature_importance(train_boosted(d, small_booster(20, 3)));
        CHECK(imp[4] == 0.0);
        double s = 0;
        for (double v : imp) s += v;
        CHECK(s == doctest::Approx(1.0));
    }
    SUBCASE("noise column is nearly unused on separable data") {
        Rng rng(8);
        auto d = clusters(rng, 30, 2, 2);
        Dataset with_noise(names(3));
        for (std::size_t i = 0; i < d.rows(); ++i) {
            const std::vector<double> x{d.at(i, 0), d.at(i, 1), rng.uniform()};
            with_noise.add_row(d.id(i), d.label(i), x);
        }
        auto cfg = small_booster(20, 2);
        cfg.colsample_bytree = 1.0;
        cfg.colsample_bylevel = 1.0;
        CHECK(feature_importance(train_boosted(with_noise, cfg))[2] < 0.01);
    }
}

TEST_CASE("model JSON round trip preserves predictions bit for bit") {
    testing::TempDir dir("model");
    Rng rng(9);
    const auto d = clusters(rng, 15, 5, 3);
    ForestConfig fc;
    fc.n_trees = 6;
    for (const auto& m : {train_boosted(d, small_booster(8, 3)), train_forest(d, fc)}) {
        save_model(m, dir / "m.json");
        const auto back = load_model(dir / "m.json");
        CHECK(back == m);
        for (std::size_t i = 0; i < d.rows(); ++i)
            CHECK(predict_proba(back, d.row(i)) == predict_proba(m, d.row(i)));
        CHECK(model_to_json(back) == model_to_json(m));
    }
    CHECK_THROWS_AS(model_from_json("{\"kind\": \"boosted\"}"), Error);
    CHECK_THROWS_AS(model_from_json("not json"), Error);
}

TEST_CASE("prediction by column name") {
    Rng rng(10);
    const auto d = clusters(rng, 10, 4, 2);
    const auto m = train_boosted(d, small_booster(5, 2));
    const std::vector<std::size_t> order{3, 1, 0, 2};
    const auto shuffled = d.select_columns(order);
    const auto a = predict_dataset(m, d);
    const auto b = predict_dataset(m, shuffled);
    CHECK(a == b);
    const std::vector<std::size_t> fewer{0, 1};
    CHECK_THROWS_AS(predict_dataset(m, d.select_columns(fewer)), Error);
}

TEST_CASE("training contract violations") {
    CHECK_THROWS_AS(train_boosted(Dataset(names(2)), small_booster(5, 2)), Error);
    Dataset d(names(1));
    const std::vector<double> nan{std::nan("")};
    d.add_row("s", 0, nan);
    CHECK_THROWS_AS(train_boosted(d, small_booster(5, 2)), Error);
    auto bad = small_booster(5, 2);
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = small_booster(0, 2);
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = small_booster(5, 2);
    bad.colsample_bylevel = 1.5;
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK(parse_model_kind("forest") == ModelKind::forest);
    CHECK_THROWS_AS(parse_model_kind("svm"), Error);
}

TEST_CASE("feature sampling") {
    std::vector<int> pool(10);
    std::iota(pool.begin(), pool.end(), 0);
    const auto s = detail::sample_features(pool, 0.4, 5);
    CHECK(s.size() == 4);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(s == detail::sample_features(pool, 0.4, 5));
    CHECK(detail::sample_features(pool, 0.01, 5).size() == 1);
    CHECK(detail::sample_features(pool, 1.0, 5) == pool);
}
