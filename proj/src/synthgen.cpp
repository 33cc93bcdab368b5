#include "bettiml/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <vector>

#include "bettiml/error.hpp"
#include "parallel.hpp"

namespace bettiml {

namespace fs = std::filesystem;

void SynthSpec::validate() const {
    if (width < kSynthMinSide || height < kSynthMinSide)
        throw Error("synthetic images must be at least " + std::to_string(kSynthMinSide) + "x" +
                    std::to_string(kSynthMinSide));
    if (noise_amplitude < 0 || noise_amplitude > 20)
        throw Error("noise amplitude must lie in [0, 20]");
    for (int c : per_class_counts)
        if (c < 0) throw Error("per-class counts must be non-negative");
}

namespace {

struct Shape {
    int cy = 0;
    int cx = 0;
    double outer = 0.0;
    double inner = 0.0;  // 0 for a filled disk
};

// Pixel gap kept between shapes so they never touch, even diagonally.
constexpr double kGap = 3.0;

}  // namespace

GrayImage generate_image(int class_id, Rng& rng, const SynthSpec& spec) {
    if (class_id < 0 || class_id >= kClassCount) throw Error("class id out of range");
    std::vector<Shape> shapes;
    std::vector<Shape> todo;
    for (int k = 0; k < class_id; ++k) {
        const double outer = static_cast<double>(rng.between(6, 8));
        todo.push_back({0, 0, outer, outer - static_cast<double>(rng.between(2, 3))});
    }
    for (int k = 0; k <= class_id; ++k)
        todo.push_back({0, 0, static_cast<double>(rng.between(3, 5)), 0.0});

    for (auto s : todo) {
        const int margin = static_cast<int>(s.outer) + 1;
        bool placed = false;
        for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
            s.cy = static_cast<int>(rng.between(margin, spec.height - 1 - margin));
            s.cx = static_cast<int>(rng.between(margin, spec.width - 1 - margin));
            placed = std::all_of(shapes.begin(), shapes.end(), [&](const Shape& o) {
                return std::hypot(s.cy - o.cy, s.cx - o.cx) >= s.outer + o.outer + kGap;
            });
        }
        if (!placed)
            throw Error("could not place shapes without overlap after " +
                        std::to_string(kPlacementAttempts) + " attempts");
        shapes.push_back(s);
    }

    GrayImage image(spec.width, spec.height, kSynthBackground);
    for (const auto& s : shapes) {
        const auto value = s.inner > 0.0 ? kSynthRing : kSynthDisk;
        for (int r = 0; r < spec.height; ++r) {
            for (int c = 0; c < spec.width; ++c) {
                const double d = std::hypot(r - s.cy, c - s.cx);
                if (d <= s.outer && d >= s.inner) image.at(r, c) = value;
            }
        }
    }
    if (spec.noise_amplitude > 0) {
        for (auto& p : image.pixels()) {
            const auto v = static_cast<int>(p) +
                           static_cast<int>(rng.between(-spec.noise_amplitude, spec.noise_amplitude));
            p = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
        }
    }
    return image;
}

Rng sample_rng(const SynthSpec& spec, int class_id, int index) {
    return Rng(derive_seed(spec.seed, 0x5e7, static_cast<std::uint64_t>(class_id),
                           static_cast<std::uint64_t>(index)));
}

fs::path generate_dataset(const SynthSpec& spec, const fs::path& out_dir, int workers) {
    spec.validate();
    const fs::path image_dir = out_dir / "images";
    std::error_code ec;
    fs::create_directories(image_dir, ec);
    if (ec) throw Error("cannot create " + image_dir.string() + ": " + ec.message());

    std::vector<ManifestEntry> entries;
    std::vector<std::pair<int, int>> jobs;
    for (int c = 0; c < kClassCount; ++c) {
        for (int i = 0; i < spec.per_class_counts[c]; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "c%d_%05d.pgm", c, i);
            entries.push_back({image_dir / name, c});
            jobs.emplace_back(c, i);
        }
    }
    std::vector<std::exception_ptr> errors(jobs.size());
    const int threads = detail::resolve_workers(workers);
    const long n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads) if (threads > 1)
    for (long k = 0; k < n; ++k) {
        try {
            Rng rng = sample_rng(spec, jobs[k].first, jobs[k].second);
            save_pgm(generate_image(jobs[k].first, rng, spec), entries[k].image_path);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    const fs::path manifest = out_dir / "manifest.csv";
    write_manifest(manifest, entries);
    return manifest;
}

}  // namespace bettiml
