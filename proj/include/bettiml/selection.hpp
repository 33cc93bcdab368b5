#pragma once

#include <filesystem>
#include <vector>

#include "bettiml/dataset.hpp"
#include "bettiml/ensemble.hpp"

namespace bettiml {

struct SelectionRow {
    double tau = 0.0;
    std::vector<std::size_t> selected;  // ascending column indices
    double accuracy = 0.0;
    double auc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    std::size_t n_features() const { return selected.size(); }
};

struct SelectionReport {
    std::vector<double> importance;  // of the base model, per column
    std::vector<SelectionRow> rows;  // tau strictly descending
    double chosen_tau = 0.0;
    std::vector<std::size_t> chosen_mask;
};

/// Trains a base booster on `train`, then for every distinct positive
/// importance value tau (descending) retrains on {j : f_j >= tau} and scores
/// the subset on `eval`. When some features have zero importance a final
/// tau = 0 row with every feature is appended. Rows are independent and may
/// be trained concurrently; the report does not depend on `workers`.
SelectionReport threshold_sweep(const Dataset& train, const Dataset& eval,
                                const BoosterConfig& cfg, int workers = 1);

/// Highest accuracy; ties to fewer features, then larger tau. Also stores
/// the choice into r.chosen_tau / r.chosen_mask.
const SelectionRow& select_optimal(SelectionReport& r);
const SelectionRow& select_optimal(const std::vector<SelectionRow>& rows);

/// `tau,n_features,accuracy,auc,precision,recall,f1,selected_indices`
void write_selection_csv(const std::filesystem::path& path, const SelectionReport& r);

}  // namespace bettiml
