// Timings for the parallel kernels against their serial references.
//   bench_kernels [images_per_class] [workers]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <omp.h>

#include "bettiml/dataset.hpp"
#include "bettiml/ensemble.hpp"
#include "bettiml/persistence.hpp"
#include "bettiml/synthgen.hpp"
#include "bettiml/vectorize.hpp"

using namespace bettiml;

namespace {

template <class F>
double seconds(F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* what, double serial, double parallel) {
    std::printf("%-28s %10.4f s %10.4f s   x%.2f\n", what, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
    const int per_class = argc > 1 ? std::atoi(argv[1]) : 50;
    const int workers = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();

    const auto dir = std::filesystem::temp_directory_path() / "bettiml_bench";
    std::filesystem::remove_all(dir);
    SynthSpec spec;
    spec.per_class_counts = {per_class, per_class, per_class, per_class};
    const auto manifest = generate_dataset(spec, dir, workers);
    const auto entries = read_manifest(manifest);

    std::printf("%d images, %d workers\n", static_cast<int>(entries.size()), workers);
    std::printf("%-28s %12s %12s\n", "kernel", "reference", "fast");

    // diagrams: union-find kernels vs boundary-matrix reduction
    std::vector<GrayImage> images;
    for (std::size_t i = 0; i < entries.size() && i < 40; ++i)
        images.push_back(load_grayscale(entries[i].image_path));
    std::size_t sink = 0;
    const double t_red = seconds([&] {
        for (const auto& img : images) sink += reduce_boundary_matrix(build_filtration(img)).first.bars.size();
    });
    const double t_uf = seconds([&] {
        for (const auto& img : images) {
            const auto f = build_filtration(img);
            sink += compute_pd0(f).bars.size() + compute_pd1(f).bars.size();
        }
    });
    report("diagrams (40 images)", t_red, t_uf);

    const FeatureOptions opts;
    std::vector<FeatureVector> feats;
    const double t_ser = seconds([&] { feats = extract_batch_serial(entries, opts); });
    const double t_par = seconds([&] { feats = extract_batch(entries, opts, workers); });
    report("feature extraction", t_ser, t_par);

    std::vector<std::string> ids;
    for (const auto& e : entries) ids.push_back(e.image_path.filename().string());
    const auto data = make_dataset(feats, ids);

    BoosterConfig bc;
    bc.n_estimators = 50;
    bc.max_depth = 4;
    report("boosting (50 rounds)", seconds([&] { train_boosted(data, bc, 1); }),
           seconds([&] { train_boosted(data, bc, workers); }));

    ForestConfig fc;
    fc.n_trees = 100;
    fc.max_depth = 10;
    report("forest (100 trees)", seconds([&] { train_forest(data, fc, 1); }),
           seconds([&] { train_forest(data, fc, workers); }));

    std::filesystem::remove_all(dir);
    return sink == 0 ? 1 : 0;
}
