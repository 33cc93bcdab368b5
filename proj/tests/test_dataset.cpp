#include <set>

#include "doctest.h"

#include "bettiml/dataset.hpp"
#include "test_support.hpp"

using namespace bettiml;

namespace {

std::vector<int> labels_from_counts(std::initializer_list<int> counts) {
    std::vector<int> y;
    int c = 0;
    for (int n : counts) {
        y.insert(y.end(), n, c);
        ++c;
    }
    return y;
}

Dataset random_dataset(Rng& rng, std::size_t rows, std::size_t cols) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < cols; ++j) names.push_back("f" + std::to_string(j));
    Dataset d(names);
    std::vector<double> x(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (auto& v : x) v = (rng.uniform() - 0.5) * 1e3;
        d.add_row("s" + std::to_string(i), static_cast<int>(rng.below(kClassCount)), x);
    }
    return d;
}

}  // namespace

TEST_CASE("split sizes") {
    SUBCASE("single class of 10") {
        const auto y = labels_from_counts({10});
        const auto s = split_indices(y, {});
        CHECK(s.train.size() == 9);
        CHECK(s.test.size() == 1);
    }
    SUBCASE("imbalanced four-class corpus") {
        const auto y = labels_from_counts({5000, 5000, 5002, 488});
        const auto s = split_indices(y, {});
        std::array<int, 4> test{}, train{};
        for (auto i : s.test) ++test[y[i]];
        for (auto i : s.train) ++train[y[i]];
        CHECK(test == std::array<int, 4>{500, 500, 500, 49});
        CHECK(train == std::array<int, 4>{4500, 4500, 4502, 439});
    }
}

TEST_CASE("split is a deterministic, sorted partition") {
    Rng rng(8);
    for (int k = 0; k < 30; ++k) {
        std::vector<int> y(20 + rng.below(200));
        for (auto& v : y) v = static_cast<int>(rng.below(kClassCount));
        const auto counts = [&] {
            std::array<int, 4> c{};
            for (int v : y) ++c[v];
            return c;
        }();
        if (*std::min_element(counts.begin(), counts.end()) < 2) continue;
        SplitSpec spec{0.8, rng.below(1000), true};
        const auto a = split_indices(y, spec);
        const auto b = split_indices(y, spec);
        CHECK(a.train == b.train);
        CHECK(a.test == b.test);
        CHECK(std::is_sorted(a.train.begin(), a.train.end()));
        CHECK(std::is_sorted(a.test.begin(), a.test.end()));
        std::set<std::size_t> all(a.train.begin(), a.train.end());
        all.insert(a.test.begin(), a.test.end());
        CHECK(all.size() == y.size());
        CHECK(a.train.size() + a.test.size() == y.size());
        // stratified: each class gets round(n * 0.2) test rows
        std::array<int, 4> test{};
        for (auto i : a.test) ++test[y[i]];
        for (int c = 0; c < 4; ++c)
            CHECK(test[c] == static_cast<int>(std::floor(counts[c] * 0.2 + 0.5 + 1e-9)));
    }
}

TEST_CASE("different seeds give different partitions") {
    const auto y = labels_from_counts({100, 100, 100, 100});
    CHECK(split_indices(y, {0.9, 1, true}).test != split_indices(y, {0.9, 2, true}).test);
}

TEST_CASE("non-stratified split") {
    const auto y = labels_from_counts({30, 30, 30, 10});
    const auto s = split_indices(y, {0.9, 3, false});
    CHECK(s.test.size() == 10);
    CHECK(s.train.size() == 90);
}

TEST_CASE("split contract violations") {
    CHECK_THROWS_AS(split_indices(labels_from_counts({5, 1}), {}), Error);
    CHECK_THROWS_AS(split_indices(labels_from_counts({5}), {1.5, 0, true}), Error);
    CHECK_THROWS_AS(split_indices(labels_from_counts({5}), {0.0, 0, true}), Error);
}

TEST_CASE("dataset split follows the indices") {
    Rng rng(1);
    const auto d = random_dataset(rng, 60, 3);
    const SplitSpec spec{0.75, 5, false};
    const auto idx = split_indices(d.labels(), spec);
    const auto [train, test] = split(d, spec);
    CHECK(train == d.select_rows(idx.train));
    CHECK(test == d.select_rows(idx.test));
}

TEST_CASE("feature CSV round trip") {
    testing::TempDir dir("ds");
    Rng rng(2);
    for (int k = 0; k < 5; ++k) {
        const auto d = random_dataset(rng, 1 + rng.below(30), 1 + rng.below(10));
        write_features(d, dir / "f.csv");
        CHECK(read_features(dir / "f.csv") == d);
    }

    Dataset empty(betti_feature_names(2));
    write_features(empty, dir / "e.csv");
    CHECK(testing::read_text(dir / "e.csv") == "id,label,b0_0,b0_1,b1_0,b1_1\n");
    const auto back = read_features(dir / "e.csv");
    CHECK(back.empty());
    CHECK(back.feature_names() == betti_feature_names(2));
}

TEST_CASE("malformed feature files") {
    testing::TempDir dir("bad");
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return dir / name;
    };
    CHECK_THROWS_AS(read_features(write("a.csv", "id,f0\nx,1\n")), Error);
    CHECK_THROWS_AS(read_features(write("b.csv", "id,label,f0\nx,1\n")), Error);
    CHECK_THROWS_AS(read_features(write("c.csv", "id,label,f0\nx,1,abc\n")), Error);
    CHECK_THROWS_AS(read_features(write("d.csv", "id,label,f0\nx,9,1\n")), Error);
    CHECK_THROWS_AS(read_features(dir / "nope.csv"), Error);
}

TEST_CASE("column selection and helpers") {
    Rng rng(3);
    auto d = random_dataset(rng, 5, 4);
    const std::vector<std::size_t> cols{3, 1};
    const auto s = d.select_columns(cols);
    CHECK(s.feature_names() == std::vector<std::string>{"f3", "f1"});
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(s.at(i, 0) == d.at(i, 3));
        CHECK(s.at(i, 1) == d.at(i, 1));
    }
    const std::vector<std::string> names{"f3", "f1"};
    CHECK(d.select_columns_by_name(names) == s);
    const std::vector<std::string> missing{"zz"};
    CHECK_THROWS_AS(d.select_columns_by_name(missing), Error);

    d.append_constant_column("const", 2.5);
    CHECK(d.cols() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(d.at(i, 4) == 2.5);

    const auto names0 = betti_feature_names(3);
    CHECK(names0 == std::vector<std::string>{"b0_0", "b0_1", "b0_2", "b1_0", "b1_1", "b1_2"});
    Dataset b(names0);
    CHECK(b.columns_with_prefix("b1_") == std::vector<std::size_t>{3, 4, 5});

    const std::vector<double> wrong(2, 0.0);
    CHECK_THROWS_AS(b.add_row("x", 0, wrong), Error);
}

TEST_CASE("make_dataset concatenates b0 then b1") {
    FeatureVector a{{1, 2}, {3, 4}, 0};
    FeatureVector b{{5, 6}, {7, 8}, 2};
    const std::vector<FeatureVector> fv{a, b};
    const std::vector<std::string> ids{"a", "b"};
    const auto d = make_dataset(fv, ids);
    CHECK(d.feature_names() == betti_feature_names(2));
    CHECK(d.values() == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(d.labels() == std::vector<int>{0, 2});
    CHECK(d.class_counts() == std::vector<std::size_t>{1, 0, 1, 0});
}
