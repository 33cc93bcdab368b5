#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace bettiml {

/// 8-bit grayscale image stored row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, std::uint8_t fill = 0);
    GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }
    bool empty() const { return pixels_.empty(); }

    std::uint8_t at(int row, int col) const { return pixels_[index(row, col)]; }
    std::uint8_t& at(int row, int col) { return pixels_[index(row, col)]; }
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    std::span<const std::uint8_t> pixels() const { return pixels_; }
    std::span<std::uint8_t> pixels() { return pixels_; }

    std::uint8_t min_value() const;

    bool operator==(const GrayImage&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// Grid symmetries.
GrayImage rotate90(const GrayImage& image);  // clockwise
GrayImage flip_horizontal(const GrayImage& image);
GrayImage flip_vertical(const GrayImage& image);

/// Integer Rec.601 luminance with round-half-up.
constexpr std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

/// Reads PGM (P2/P5) or 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette).
/// Color input goes through luminance(); alpha is ignored.
GrayImage load_grayscale(const std::filesystem::path& path);

/// Writes binary PGM (P5, maxval 255).
void save_pgm(const GrayImage& image, const std::filesystem::path& path);

/// 8-bit PNG writer. `channels` is 1 (gray) or 3 (RGB); `data` is row-major interleaved.
void save_png(const std::filesystem::path& path, int width, int height, int channels,
              std::span<const std::uint8_t> data);

// Class ids: 0 non-demented, 1 very mild, 2 mild, 3 moderate.
inline constexpr int kClassCount = 4;

struct ManifestEntry {
    std::filesystem::path image_path;
    int label = 0;
};

/// Parses a `path,label` CSV. Relative paths are resolved against the
/// manifest's directory; existence of images is not checked here.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

}  // namespace bettiml
