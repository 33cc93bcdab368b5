#include "bettiml/vectorize.hpp"

#include <algorithm>
#include <exception>

#include "bettiml/error.hpp"
#include "parallel.hpp"

namespace bettiml {

BettiCurve betti_curve(const PersistenceDiagram& pd, ThresholdGrid grid) {
    validate(grid);
    BettiCurve curve{pd.dim, grid, std::vector<int>(static_cast<std::size_t>(grid.count), 0)};
    std::vector<int> delta(static_cast<std::size_t>(grid.count) + 1, 0);
    for (const auto& bar : pd.bars) {
        const int lo = std::max(bar.birth, grid.first) - grid.first;
        const int hi = std::min(bar.death, grid.last() + 1) - grid.first;
        if (lo >= hi) continue;
        ++delta[lo];
        --delta[hi];
    }
    int running = 0;
    for (int k = 0; k < grid.count; ++k) {
        running += delta[k];
        curve.values[k] = running;
    }
    return curve;
}

Aggregation parse_aggregation(const std::string& name) {
    if (name == "mean") return Aggregation::mean;
    if (name == "sum") return Aggregation::sum;
    throw Error("unknown aggregation '" + name + "' (expected mean|sum)");
}

std::string to_string(Aggregation agg) { return agg == Aggregation::mean ? "mean" : "sum"; }

std::pair<int, int> bin_range(int j, int curve_length, int bins) {
    const long L = curve_length;
    return {static_cast<int>(j * L / bins), static_cast<int>((j + 1) * L / bins)};
}

std::vector<double> bin_curve(const BettiCurve& curve, int bins, Aggregation agg) {
    const int length = static_cast<int>(curve.values.size());
    if (bins < 1 || bins > length)
        throw Error("bin count " + std::to_string(bins) + " outside [1, " +
                    std::to_string(length) + "]");
    std::vector<double> out(static_cast<std::size_t>(bins));
    for (int j = 0; j < bins; ++j) {
        const auto [lo, hi] = bin_range(j, length, bins);
        long total = 0;
        for (int t = lo; t < hi; ++t) total += curve.values[t];
        out[j] = agg == Aggregation::mean ? static_cast<double>(total) / (hi - lo)
                                          : static_cast<double>(total);
    }
    return out;
}

std::vector<double> FeatureVector::concatenated() const {
    std::vector<double> x(b0);
    x.insert(x.end(), b1.begin(), b1.end());
    return x;
}

namespace {

FeatureVector vectorize(const PersistenceDiagram& pd0, const PersistenceDiagram& pd1,
                        const FeatureOptions& opts) {
    return {bin_curve(betti_curve(pd0, opts.grid), opts.bins, opts.agg),
            bin_curve(betti_curve(pd1, opts.grid), opts.bins, opts.agg), -1};
}

}  // namespace

FeatureVector extract_features(const GrayImage& image, const FeatureOptions& opts) {
    const auto f = build_filtration(image);
    return vectorize(compute_pd0(f), compute_pd1(f), opts);
}

FeatureVector extract_features_reference(const GrayImage& image, const FeatureOptions& opts) {
    const auto [pd0, pd1] = reduce_boundary_matrix(build_filtration(image));
    return vectorize(pd0, pd1, opts);
}

std::vector<FeatureVector> extract_batch(std::span<const ManifestEntry> entries,
                                         const FeatureOptions& opts, int workers) {
    validate(opts.grid);
    std::vector<FeatureVector> out(entries.size());
    std::vector<std::exception_ptr> errors(entries.size());
    const auto n = static_cast<long>(entries.size());
    const int threads = detail::resolve_workers(workers);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads) if (threads != 1)
    for (long i = 0; i < n; ++i) {
        try {
            out[i] = extract_features(load_grayscale(entries[i].image_path), opts);
            out[i].label = entries[i].label;
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    // Report the first failing entry in manifest order.
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::vector<FeatureVector> extract_batch_serial(std::span<const ManifestEntry> entries,
                                                const FeatureOptions& opts) {
    std::vector<FeatureVector> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        out.push_back(extract_features(load_grayscale(e.image_path), opts));
        out.back().label = e.label;
    }
    return out;
}

}  // namespace bettiml
