#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bettiml/dataset.hpp"
#include "bettiml/ensemble.hpp"

namespace bettiml {

/// Square count matrix, rows = true class, columns = predicted class.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int classes = kClassCount)
        : k_(classes), counts_(static_cast<std::size_t>(classes) * classes, 0) {}
    ConfusionMatrix(int classes, std::vector<long> row_major);

    int classes() const { return k_; }
    long at(int truth, int predicted) const { return counts_[truth * k_ + predicted]; }
    long& at(int truth, int predicted) { return counts_[truth * k_ + predicted]; }
    long total() const;
    long trace() const;
    long row_sum(int c) const;
    long col_sum(int c) const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    int k_;
    std::vector<long> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 int classes = kClassCount);

struct ClassificationMetrics {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> precision;  // per class, 0/0 -> 0
    std::vector<double> recall;
    std::vector<double> f1;
};

/// Macro precision averages over classes that were predicted at least once,
/// macro recall over classes with support, macro F1 over classes that appear
/// in either role.
ClassificationMetrics classification_metrics(const ConfusionMatrix& cm);

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocResult {
    std::vector<std::vector<RocPoint>> curves;   // per class; empty if undefined
    std::vector<std::optional<double>> auc;      // per class; nullopt if undefined
    double macro_auc = 0.0;
};

/// Binary ROC over every distinct score (ties grouped), from threshold +inf
/// down to -inf; AUC by the trapezoidal rule. Undefined without both
/// positives and negatives.
std::optional<double> binary_auc(std::span<const double> scores, std::span<const char> positive,
                                 std::vector<RocPoint>* curve = nullptr);

/// One-vs-rest over the score columns; macro AUC averages the defined classes.
RocResult roc_auc_ovr(std::span<const int> y_true, std::span<const ClassProbabilities> scores);

struct PcaResult {
    std::size_t k = 0;
    std::size_t dims = 0;
    std::vector<double> projections;  // N x k row-major
    std::vector<double> components;    // k x D row-major, orthonormal rows
    std::vector<double> explained_variance;
};

/// Eigendecomposition of the sample covariance (divisor N-1) of the
/// mean-centred rows. Each component's largest-magnitude entry is positive.
PcaResult pca_project(std::span<const double> row_major, std::size_t rows, std::size_t cols,
                      std::size_t k = 3);

struct DistributionStats {
    int label = 0;
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Per-class summary of each sample's mean feature value. Quartiles use
/// linear interpolation between order statistics. Classes without samples
/// are omitted.
std::vector<DistributionStats> class_distribution_summary(const Dataset& d);

struct MetricsReport {
    ClassificationMetrics classification;
    ConfusionMatrix confusion;
    RocResult roc;
};

MetricsReport evaluate_model(const TreeEnsembleModel& m, const Dataset& test);

/// {accuracy, precision, recall, f1, auc, per_class_auc[4], confusion[4][4]}
std::string metrics_json(const MetricsReport& r);
void write_metrics_json(const std::filesystem::path& path, const MetricsReport& r);
/// `class,threshold,fpr,tpr`
void write_roc_csv(const std::filesystem::path& path, const RocResult& roc);
/// `id,label,pc1,pc2,pc3`
void write_pca_csv(const std::filesystem::path& path, const Dataset& d, const PcaResult& pca);
/// `class,feature_set,mean,median,q1,q3,min,max`; one block per feature set.
void write_distribution_csv(const std::filesystem::path& path,
                            std::span<const std::pair<std::string, Dataset>> feature_sets);

}  // namespace bettiml
