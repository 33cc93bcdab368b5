#include "bettiml/evaluation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "bettiml/error.hpp"
#include "csv.hpp"

namespace bettiml {

ConfusionMatrix::ConfusionMatrix(int classes, std::vector<long> row_major)
    : k_(classes), counts_(std::move(row_major)) {
    if (counts_.size() != static_cast<std::size_t>(k_) * k_)
        throw Error("confusion matrix size mismatch");
}

long ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), 0L); }

long ConfusionMatrix::trace() const {
    long t = 0;
    for (int c = 0; c < k_; ++c) t += at(c, c);
    return t;
}

long ConfusionMatrix::row_sum(int c) const {
    long s = 0;
    for (int j = 0; j < k_; ++j) s += at(c, j);
    return s;
}

long ConfusionMatrix::col_sum(int c) const {
    long s = 0;
    for (int i = 0; i < k_; ++i) s += at(i, c);
    return s;
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 int classes) {
    if (y_true.size() != y_pred.size()) throw Error("confusion_matrix: length mismatch");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_true[i] >= classes || y_pred[i] < 0 || y_pred[i] >= classes)
            throw Error("confusion_matrix: label out of range");
        ++cm.at(y_true[i], y_pred[i]);
    }
    return cm;
}

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw Error("classification_metrics: empty confusion matrix");
    const int k = cm.classes();
    ClassificationMetrics m;
    m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
    m.precision.assign(k, 0.0);
    m.recall.assign(k, 0.0);
    m.f1.assign(k, 0.0);
    int n_prec = 0;
    int n_rec = 0;
    int n_f1 = 0;
    for (int c = 0; c < k; ++c) {
        const long tp = cm.at(c, c);
        const long predicted = cm.col_sum(c);
        const long support = cm.row_sum(c);
        if (predicted > 0) {
            m.precision[c] = static_cast<double>(tp) / static_cast<double>(predicted);
            m.macro_precision += m.precision[c];
            ++n_prec;
        }
        if (support > 0) {
            m.recall[c] = static_cast<double>(tp) / static_cast<double>(support);
            m.macro_recall += m.recall[c];
            ++n_rec;
        }
        const double pr = m.precision[c] + m.recall[c];
        m.f1[c] = pr > 0.0 ? 2.0 * m.precision[c] * m.recall[c] / pr : 0.0;
        if (predicted > 0 || support > 0) {
            m.macro_f1 += m.f1[c];
            ++n_f1;
        }
    }
    if (n_prec) m.macro_precision /= n_prec;
    if (n_rec) m.macro_recall /= n_rec;
    if (n_f1) m.macro_f1 /= n_f1;
    return m;
}

std::optional<double> binary_auc(std::span<const double> scores, std::span<const char> positive,
                                 std::vector<RocPoint>* curve) {
    if (scores.size() != positive.size()) throw Error("binary_auc: length mismatch");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), 1));
    const auto n_neg = static_cast<double>(scores.size()) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) {
        if (curve) curve->clear();
        return std::nullopt;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<RocPoint> points{{inf, 0.0, 0.0}};
    double tp = 0.0;
    double fp = 0.0;
    double area = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        const double prev_tp = tp;
        const double prev_fp = fp;
        for (; i < order.size() && scores[order[i]] == s; ++i) (positive[order[i]] ? tp : fp) += 1.0;
        area += (fp - prev_fp) * (tp + prev_tp) / 2.0;
        points.push_back({s, fp / n_neg, tp / n_pos});
    }
    points.push_back({-inf, 1.0, 1.0});
    if (curve) *curve = std::move(points);
    return area / (n_pos * n_neg);
}

RocResult roc_auc_ovr(std::span<const int> y_true, std::span<const ClassProbabilities> scores) {
    if (y_true.size() != scores.size()) throw Error("roc_auc_ovr: length mismatch");
    if (y_true.empty()) throw Error("roc_auc_ovr: no samples");
    RocResult r;
    r.curves.resize(kClassCount);
    r.auc.resize(kClassCount);
    std::vector<double> s(y_true.size());
    std::vector<char> pos(y_true.size());
    double total = 0.0;
    int defined = 0;
    for (int c = 0; c < kClassCount; ++c) {
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            s[i] = scores[i][c];
            pos[i] = y_true[i] == c;
        }
        r.auc[c] = binary_auc(s, pos, &r.curves[c]);
        if (r.auc[c]) {
            total += *r.auc[c];
            ++defined;
        }
    }
    if (defined == 0) throw Error("roc_auc_ovr: no class has both positives and negatives");
    r.macro_auc = total / defined;
    return r;
}

PcaResult pca_project(std::span<const double> row_major, std::size_t rows, std::size_t cols,
                      std::size_t k) {
    if (row_major.size() != rows * cols) throw Error("pca_project: matrix size mismatch");
    if (rows < 2) throw Error("pca_project: need at least 2 samples");
    if (k < 1 || k > std::min(rows - 1, cols))
        throw Error("pca_project: k must lie in [1, min(N-1, D)]");
    using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const Matrix> x(row_major.data(), static_cast<Eigen::Index>(rows),
                               static_cast<Eigen::Index>(cols));
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Matrix centered = x.rowwise() - mean;
    const Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(rows - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("pca_project: eigensolver failed");

    PcaResult out;
    out.k = k;
    out.dims = cols;
    out.components.resize(k * cols);
    out.explained_variance.resize(k);
    // Eigen returns ascending eigenvalues.
    for (std::size_t c = 0; c < k; ++c) {
        const auto src = static_cast<Eigen::Index>(cols - 1 - c);
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index big = 0;
        v.cwiseAbs().maxCoeff(&big);
        if (v[big] < 0) v = -v;
        for (std::size_t j = 0; j < cols; ++j) out.components[c * cols + j] = v[static_cast<Eigen::Index>(j)];
        out.explained_variance[c] = std::max(0.0, solver.eigenvalues()[src]);
    }
    Eigen::Map<const Matrix> comp(out.components.data(), static_cast<Eigen::Index>(k),
                                  static_cast<Eigen::Index>(cols));
    const Matrix proj = centered * comp.transpose();
    out.projections.assign(proj.data(), proj.data() + proj.size());
    return out;
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<DistributionStats> class_distribution_summary(const Dataset& d) {
    if (d.empty()) throw Error("class_distribution_summary: empty dataset");
    std::vector<std::vector<double>> per_class(kClassCount);
    for (std::size_t i = 0; i < d.rows(); ++i) {
        const auto x = d.row(i);
        const double agg =
            x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
        per_class[d.label(i)].push_back(agg);
    }
    std::vector<DistributionStats> out;
    for (int c = 0; c < kClassCount; ++c) {
        auto& v = per_class[c];
        if (v.empty()) continue;
        std::sort(v.begin(), v.end());
        DistributionStats s;
        s.label = c;
        s.count = v.size();
        s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        s.median = quantile(v, 0.5);
        s.q1 = quantile(v, 0.25);
        s.q3 = quantile(v, 0.75);
        s.min = v.front();
        s.max = v.back();
        out.push_back(s);
    }
    return out;
}

MetricsReport evaluate_model(const TreeEnsembleModel& m, const Dataset& test) {
    if (test.empty()) throw Error("evaluate_model: empty test set");
    const auto proba = predict_dataset(m, test);
    std::vector<int> pred(proba.size());
    for (std::size_t i = 0; i < proba.size(); ++i)
        pred[i] = static_cast<int>(std::max_element(proba[i].begin(), proba[i].end()) -
                                   proba[i].begin());
    MetricsReport r{{}, confusion_matrix(test.labels(), pred), roc_auc_ovr(test.labels(), proba)};
    r.classification = classification_metrics(r.confusion);
    return r;
}

std::string metrics_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["accuracy"] = r.classification.accuracy;
    j["precision"] = r.classification.macro_precision;
    j["recall"] = r.classification.macro_recall;
    j["f1"] = r.classification.macro_f1;
    j["auc"] = r.roc.macro_auc;
    auto per_class = nlohmann::ordered_json::array();
    for (const auto& a : r.roc.auc) per_class.push_back(a ? nlohmann::ordered_json(*a) : nlohmann::ordered_json(nullptr));
    j["per_class_auc"] = per_class;
    auto cm = nlohmann::ordered_json::array();
    for (int i = 0; i < r.confusion.classes(); ++i) {
        auto row = nlohmann::ordered_json::array();
        for (int c = 0; c < r.confusion.classes(); ++c) row.push_back(r.confusion.at(i, c));
        cm.push_back(row);
    }
    j["confusion"] = cm;
    return j.dump(2);
}

void write_metrics_json(const std::filesystem::path& path, const MetricsReport& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << metrics_json(r) << '\n';
}

void write_roc_csv(const std::filesystem::path& path, const RocResult& roc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "class,threshold,fpr,tpr\n";
    for (std::size_t c = 0; c < roc.curves.size(); ++c)
        for (const auto& p : roc.curves[c])
            out << c << ',' << detail::format_double(p.threshold) << ','
                << detail::format_double(p.fpr) << ',' << detail::format_double(p.tpr) << '\n';
}

void write_pca_csv(const std::filesystem::path& path, const Dataset& d, const PcaResult& pca) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "id,label";
    for (std::size_t c = 0; c < pca.k; ++c) out << ",pc" << c + 1;
    out << '\n';
    for (std::size_t i = 0; i < d.rows(); ++i) {
        out << d.id(i) << ',' << d.label(i);
        for (std::size_t c = 0; c < pca.k; ++c)
            out << ',' << detail::format_double(pca.projections[i * pca.k + c]);
        out << '\n';
    }
}

void write_distribution_csv(const std::filesystem::path& path,
                            std::span<const std::pair<std::string, Dataset>> feature_sets) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "class,feature_set,mean,median,q1,q3,min,max\n";
    for (const auto& [name, d] : feature_sets) {
        for (const auto& s : class_distribution_summary(d)) {
            out << s.label << ',' << name;
            for (double v : {s.mean, s.median, s.q1, s.q3, s.min, s.max})
                out << ',' << detail::format_double(v);
            out << '\n';
        }
    }
}

}  // namespace bettiml
