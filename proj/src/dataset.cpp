#include "bettiml/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "bettiml/error.hpp"
#include "bettiml/rng.hpp"
#include "csv.hpp"

namespace bettiml {

namespace fs = std::filesystem;

Dataset::Dataset(std::vector<std::string> feature_names) : names_(std::move(feature_names)) {}

void Dataset::add_row(std::string id, int label, std::span<const double> x) {
    if (x.size() != cols())
        throw Error("row has " + std::to_string(x.size()) + " features, expected " +
                    std::to_string(cols()));
    if (label < 0 || label >= kClassCount) throw Error("label out of range");
    ids_.push_back(std::move(id));
    labels_.push_back(label);
    values_.insert(values_.end(), x.begin(), x.end());
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
    Dataset out(names_);
    out.ids_.reserve(indices.size());
    out.labels_.reserve(indices.size());
    out.values_.reserve(indices.size() * cols());
    for (auto i : indices) out.add_row(ids_[i], labels_[i], row(i));
    return out;
}

Dataset Dataset::select_columns(std::span<const std::size_t> columns) const {
    std::vector<std::string> names;
    for (auto c : columns) {
        if (c >= cols()) throw Error("column index out of range");
        names.push_back(names_[c]);
    }
    Dataset out(std::move(names));
    out.ids_ = ids_;
    out.labels_ = labels_;
    out.values_.reserve(rows() * columns.size());
    for (std::size_t i = 0; i < rows(); ++i)
        for (auto c : columns) out.values_.push_back(at(i, c));
    return out;
}

Dataset Dataset::select_columns_by_name(std::span<const std::string> names) const {
    std::vector<std::size_t> columns;
    for (const auto& n : names) {
        const auto it = std::find(names_.begin(), names_.end(), n);
        if (it == names_.end()) throw Error("feature '" + n + "' not present in dataset");
        columns.push_back(static_cast<std::size_t>(it - names_.begin()));
    }
    return select_columns(columns);
}

std::vector<std::size_t> Dataset::columns_with_prefix(const std::string& prefix) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < names_.size(); ++j)
        if (names_[j].starts_with(prefix)) out.push_back(j);
    return out;
}

void Dataset::append_constant_column(std::string name, double value) {
    const std::size_t old_cols = cols();
    std::vector<double> widened;
    widened.reserve(rows() * (old_cols + 1));
    for (std::size_t i = 0; i < rows(); ++i) {
        widened.insert(widened.end(), values_.begin() + static_cast<std::ptrdiff_t>(i * old_cols),
                       values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * old_cols));
        widened.push_back(value);
    }
    values_ = std::move(widened);
    names_.push_back(std::move(name));
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(kClassCount, 0);
    for (int y : labels_) ++counts[y];
    return counts;
}

std::vector<std::string> betti_feature_names(int bins) {
    std::vector<std::string> names;
    for (int dim = 0; dim <= 1; ++dim)
        for (int j = 0; j < bins; ++j)
            names.push_back("b" + std::to_string(dim) + "_" + std::to_string(j));
    return names;
}

Dataset make_dataset(std::span<const FeatureVector> features, std::span<const std::string> ids) {
    if (features.size() != ids.size()) throw Error("make_dataset: ids/features size mismatch");
    const int bins = features.empty() ? 0 : static_cast<int>(features.front().b0.size());
    Dataset d(betti_feature_names(bins));
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].label < 0) throw Error("make_dataset: unlabeled feature vector");
        d.add_row(ids[i], features[i].label, features[i].concatenated());
    }
    return d;
}

namespace {

std::size_t test_share(std::size_t count, double train_fraction) {
    const double x = static_cast<double>(count) * (1.0 - train_fraction);
    // The epsilon absorbs representation error in 1 - train_fraction (0.1 is
    // not exact), so that e.g. 5 * 0.1 rounds up as intended.
    return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

}  // namespace

SplitIndices split_indices(std::span<const int> labels, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw Error("train fraction must lie in (0, 1)");
    SplitIndices out;
    auto take = [&](std::vector<std::size_t>& group, std::uint64_t tag) {
        Rng rng(derive_seed(spec.seed, tag));
        rng.shuffle(std::span<std::size_t>(group));
        const std::size_t n_test = test_share(group.size(), spec.train_fraction);
        out.test.insert(out.test.end(), group.begin(), group.begin() + static_cast<long>(n_test));
        out.train.insert(out.train.end(), group.begin() + static_cast<long>(n_test), group.end());
    };

    if (spec.stratified) {
        for (int c = 0; c < kClassCount; ++c) {
            std::vector<std::size_t> group;
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == c) group.push_back(i);
            if (group.empty()) continue;
            if (group.size() < 2)
                throw Error("class " + std::to_string(c) +
                            " has fewer than 2 samples; cannot stratify");
            take(group, static_cast<std::uint64_t>(c));
        }
    } else {
        std::vector<std::size_t> all(labels.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        take(all, 0xA11);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec) {
    const auto idx = split_indices(d.labels(), spec);
    return {d.select_rows(idx.train), d.select_rows(idx.test)};
}

void write_features(const Dataset& d, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "id,label";
    for (const auto& n : d.feature_names()) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < d.rows(); ++i) {
        out << d.id(i) << ',' << d.label(i);
        for (double v : d.row(i)) out << ',' << detail::format_double(v);
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

Dataset read_features(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    if (!detail::read_line(in, line)) throw Error("features file has no header: " + path.string());
    const auto header = detail::split_csv(line);
    if (header.size() < 2 || header[0] != "id" || header[1] != "label")
        throw Error("malformed features header (expected `id,label,...`): " + path.string());
    std::vector<std::string> names(header.begin() + 2, header.end());
    Dataset d(std::move(names));
    std::vector<double> x(d.cols());
    std::size_t line_no = 1;
    while (detail::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = detail::split_csv(line);
        const auto where = path.string() + ":" + std::to_string(line_no);
        if (cells.size() != header.size()) throw Error("ragged row at " + where);
        int label = -1;
        if (!detail::parse_int(cells[1], label)) throw Error("non-numeric label at " + where);
        for (std::size_t j = 0; j < x.size(); ++j)
            if (!detail::parse_double(cells[j + 2], x[j]))
                throw Error("non-numeric cell at " + where);
        d.add_row(std::string(cells[0]), label, x);
    }
    return d;
}

void write_split_csv(const fs::path& path, const Dataset& d, const SplitIndices& indices) {
    std::vector<const char*> part(d.rows(), nullptr);
    for (auto i : indices.train) part[i] = "train";
    for (auto i : indices.test) part[i] = "test";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "id,partition\n";
    for (std::size_t i = 0; i < d.rows(); ++i)
        if (part[i]) out << d.id(i) << ',' << part[i] << '\n';
}

}  // namespace bettiml
