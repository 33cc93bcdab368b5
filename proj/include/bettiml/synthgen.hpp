#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "bettiml/imaging.hpp"
#include "bettiml/rng.hpp"

namespace bettiml {

/// Images whose class is written into their topology: class c draws c+1
/// filled disks (intensity 30) and c annuli (intensity 60) on a background of
/// 200, so at any threshold between the shape and background levels the
/// sublevel set has 2c+1 components and c loops.
struct SynthSpec {
    int width = 64;
    int height = 64;
    std::array<int, kClassCount> per_class_counts{50, 50, 50, 50};
    int noise_amplitude = 8;  // uniform integer noise in [-a, a], 0 <= a <= 20
    std::uint64_t seed = 0;

    void validate() const;
};

inline constexpr std::uint8_t kSynthBackground = 200;
inline constexpr std::uint8_t kSynthDisk = 30;
inline constexpr std::uint8_t kSynthRing = 60;
inline constexpr int kPlacementAttempts = 1000;
// Smallest side on which three annuli and four disks place reliably.
inline constexpr int kSynthMinSide = 56;

GrayImage generate_image(int class_id, Rng& rng, const SynthSpec& spec);

/// Generator state for sample `index` of `class_id`.
Rng sample_rng(const SynthSpec& spec, int class_id, int index);

/// Writes images/<class>_<index>.pgm and manifest.csv under out_dir; returns
/// the manifest path.
std::filesystem::path generate_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir,
                                       int workers = 1);

}  // namespace bettiml
