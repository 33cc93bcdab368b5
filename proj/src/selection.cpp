#include "bettiml/selection.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <functional>

#include "bettiml/error.hpp"
#include "bettiml/evaluation.hpp"
#include "csv.hpp"
#include "parallel.hpp"

namespace bettiml {

SelectionReport threshold_sweep(const Dataset& train, const Dataset& eval,
                                const BoosterConfig& cfg, int workers) {
    if (train.feature_names() != eval.feature_names())
        throw Error("threshold_sweep: train and evaluation features differ");
    SelectionReport report;
    const auto base = train_boosted(train, cfg, workers);
    report.importance = feature_importance(base);
    const auto& f = report.importance;

    std::vector<double> taus;
    for (double v : f)
        if (v > 0.0) taus.push_back(v);
    std::sort(taus.begin(), taus.end(), std::greater<>());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
    const bool has_zero = std::any_of(f.begin(), f.end(), [](double v) { return v <= 0.0; });
    if (has_zero || taus.empty()) taus.push_back(0.0);

    report.rows.resize(taus.size());
    for (std::size_t r = 0; r < taus.size(); ++r) {
        report.rows[r].tau = taus[r];
        for (std::size_t j = 0; j < f.size(); ++j)
            if (f[j] >= taus[r]) report.rows[r].selected.push_back(j);
    }

    std::vector<std::exception_ptr> errors(taus.size());
    const int threads = detail::resolve_workers(workers);
    const long n_rows = static_cast<long>(taus.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1)
    for (long r = 0; r < n_rows; ++r) {
        try {
            auto& row = report.rows[r];
            const auto model = train_boosted(train.select_columns(row.selected), cfg, 1);
            const auto m = evaluate_model(model, eval.select_columns(row.selected));
            row.accuracy = m.classification.accuracy;
            row.auc = m.roc.macro_auc;
            row.precision = m.classification.macro_precision;
            row.recall = m.classification.macro_recall;
            row.f1 = m.classification.macro_f1;
        } catch (...) {
            errors[r] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    select_optimal(report);
    return report;
}

const SelectionRow& select_optimal(const std::vector<SelectionRow>& rows) {
    if (rows.empty()) throw Error("select_optimal: empty report");
    const auto better = [](const SelectionRow& a, const SelectionRow& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        if (a.n_features() != b.n_features()) return a.n_features() < b.n_features();
        return a.tau > b.tau;
    };
    const SelectionRow* best = &rows.front();
    for (const auto& row : rows)
        if (better(row, *best)) best = &row;
    return *best;
}

const SelectionRow& select_optimal(SelectionReport& r) {
    const auto& best = select_optimal(r.rows);
    r.chosen_tau = best.tau;
    r.chosen_mask = best.selected;
    return best;
}

void write_selection_csv(const std::filesystem::path& path, const SelectionReport& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "tau,n_features,accuracy,auc,precision,recall,f1,selected_indices\n";
    for (const auto& row : r.rows) {
        out << detail::format_double(row.tau) << ',' << row.n_features();
        for (double v : {row.accuracy, row.auc, row.precision, row.recall, row.f1})
            out << ',' << detail::format_double(v);
        out << ',';
        for (std::size_t k = 0; k < row.selected.size(); ++k)
            out << (k ? ";" : "") << row.selected[k];
        out << '\n';
    }
}

}  // namespace bettiml
