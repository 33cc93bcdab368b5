#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bettiml/filtration.hpp"
#include "bettiml/imaging.hpp"
#include "bettiml/persistence.hpp"

namespace bettiml {

/// Betti numbers of one dimension evaluated on a threshold grid.
struct BettiCurve {
    int dim = 0;
    ThresholdGrid grid;
    std::vector<int> values;  // values[k] = beta_dim at threshold grid.first + k

    bool operator==(const BettiCurve& o) const { return dim == o.dim && values == o.values; }
};

/// values[t] = #{bars with birth <= t < death}.
BettiCurve betti_curve(const PersistenceDiagram& pd, ThresholdGrid grid = {});

enum class Aggregation { mean, sum };

Aggregation parse_aggregation(const std::string& name);
std::string to_string(Aggregation agg);

/// Half-open range [first, second) of curve indices covered by bin j:
/// [floor(j*L/B), floor((j+1)*L/B)).
std::pair<int, int> bin_range(int j, int curve_length, int bins);

/// Aggregates a curve into `bins` bins (1 <= bins <= curve length).
std::vector<double> bin_curve(const BettiCurve& curve, int bins = 100,
                              Aggregation agg = Aggregation::mean);

struct FeatureOptions {
    int bins = 100;
    Aggregation agg = Aggregation::mean;
    ThresholdGrid grid;
};

/// Binned Betti-0 and Betti-1 descriptor of one image.
struct FeatureVector {
    std::vector<double> b0;
    std::vector<double> b1;
    int label = -1;  // -1 when unlabeled

    std::vector<double> concatenated() const;
    bool operator==(const FeatureVector&) const = default;
};

/// Filtration, diagrams, curves and binning for one image.
FeatureVector extract_features(const GrayImage& image, const FeatureOptions& opts = {});

/// Same pipeline, with the diagrams routed through the boundary-matrix
/// reference instead of the union-find kernels.
FeatureVector extract_features_reference(const GrayImage& image,
                                         const FeatureOptions& opts = {});

/// Loads and extracts every image. `workers` <= 0 uses the OpenMP default;
/// output order and values never depend on the worker count.
std::vector<FeatureVector> extract_batch(std::span<const ManifestEntry> entries,
                                         const FeatureOptions& opts, int workers = 1);

/// Single-threaded loop over extract_features; the batch kernel's reference.
std::vector<FeatureVector> extract_batch_serial(std::span<const ManifestEntry> entries,
                                                const FeatureOptions& opts);

}  // namespace bettiml
