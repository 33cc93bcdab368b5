#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bettiml/vectorize.hpp"

namespace bettiml {

/// Row-major feature matrix with labels, sample ids and column names.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<std::string> feature_names);

    std::size_t rows() const { return labels_.size(); }
    std::size_t cols() const { return names_.size(); }
    bool empty() const { return labels_.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols(), cols()};
    }
    double at(std::size_t i, std::size_t j) const { return values_[i * cols() + j]; }
    int label(std::size_t i) const { return labels_[i]; }
    const std::string& id(std::size_t i) const { return ids_[i]; }

    const std::vector<int>& labels() const { return labels_; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<std::string>& feature_names() const { return names_; }
    const std::vector<double>& values() const { return values_; }

    void add_row(std::string id, int label, std::span<const double> x);

    Dataset select_rows(std::span<const std::size_t> indices) const;
    Dataset select_columns(std::span<const std::size_t> columns) const;
    /// Columns whose names match `names`, in the given order. Throws when one is missing.
    Dataset select_columns_by_name(std::span<const std::string> names) const;
    /// Indices of columns whose name starts with `prefix`.
    std::vector<std::size_t> columns_with_prefix(const std::string& prefix) const;
    /// Appends a column with the same value in every row.
    void append_constant_column(std::string name, double value);

    /// Samples per class id (0..kClassCount-1).
    std::vector<std::size_t> class_counts() const;

    bool operator==(const Dataset&) const = default;

private:
    std::vector<std::string> names_;
    std::vector<std::string> ids_;
    std::vector<int> labels_;
    std::vector<double> values_;
};

/// Standard names: b0_0..b0_{B-1}, b1_0..b1_{B-1}.
std::vector<std::string> betti_feature_names(int bins);

Dataset make_dataset(std::span<const FeatureVector> features, std::span<const std::string> ids);

struct SplitSpec {
    double train_fraction = 0.9;
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct SplitIndices {
    std::vector<std::size_t> train;  // ascending
    std::vector<std::size_t> test;   // ascending
};

/// Per-class (or global) seeded shuffle; the test share of each group is
/// round(count * (1 - train_fraction)), half rounding up.
SplitIndices split_indices(std::span<const int> labels, const SplitSpec& spec);

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec);

/// `id,label,<feature names...>` with shortest round-trip reals.
void write_features(const Dataset& d, const std::filesystem::path& path);
Dataset read_features(const std::filesystem::path& path);

/// `id,partition` in dataset row order.
void write_split_csv(const std::filesystem::path& path, const Dataset& d,
                     const SplitIndices& indices);

}  // namespace bettiml
