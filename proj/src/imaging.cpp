#include "bettiml/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "bettiml/error.hpp"
#include "csv.hpp"

namespace bettiml {

namespace fs = std::filesystem;

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : GrayImage(width, height,
                std::vector<std::uint8_t>(
                    static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill)) {}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1) throw Error("image dimensions must be positive");
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw Error("pixel count does not match width x height");
}

std::uint8_t GrayImage::min_value() const {
    return *std::min_element(pixels_.begin(), pixels_.end());
}

GrayImage rotate90(const GrayImage& image) {
    const int h = image.height();
    const int w = image.width();
    GrayImage out(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) out.at(c, h - 1 - r) = image.at(r, c);
    return out;
}

GrayImage flip_horizontal(const GrayImage& image) {
    GrayImage out(image.width(), image.height());
    for (int r = 0; r < image.height(); ++r)
        for (int c = 0; c < image.width(); ++c) out.at(r, image.width() - 1 - c) = image.at(r, c);
    return out;
}

GrayImage flip_vertical(const GrayImage& image) {
    GrayImage out(image.width(), image.height());
    for (int r = 0; r < image.height(); ++r)
        for (int c = 0; c < image.width(); ++c) out.at(image.height() - 1 - r, c) = image.at(r, c);
    return out;
}

namespace {

std::string read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// PGM header tokens may be separated by arbitrary whitespace and comments.
class PnmHeader {
public:
    explicit PnmHeader(std::string_view data) : data_(data) {}

    long next_int(const fs::path& path) {
        skip_space();
        long value = 0;
        auto [ptr, ec] = std::from_chars(data_.data() + pos_, data_.data() + data_.size(), value);
        if (ec != std::errc{}) throw Error("malformed PGM header in " + path.string());
        pos_ = static_cast<std::size_t>(ptr - data_.data());
        return value;
    }

    std::size_t pos() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }
    void skip_space() {
        while (pos_ < data_.size()) {
            if (data_[pos_] == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

private:
    std::string_view data_;
    std::size_t pos_ = 2;
};

GrayImage load_pgm(const fs::path& path, const std::string& data) {
    const bool binary = data[1] == '5';
    PnmHeader header(data);
    const long width = header.next_int(path);
    const long height = header.next_int(path);
    const long maxval = header.next_int(path);
    if (width < 1 || height < 1) throw Error("zero-sized image: " + path.string());
    if (maxval < 1 || maxval > 255)
        throw Error("unsupported bit depth (maxval " + std::to_string(maxval) + ") in " +
                    path.string());
    const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<std::uint8_t> pixels(count);
    if (binary) {
        header.advance(1);  // single whitespace byte after maxval
        if (data.size() < header.pos() + count) throw Error("truncated PGM: " + path.string());
        std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(header.pos()), count,
                    pixels.begin());
    } else {
        for (auto& p : pixels) {
            const long v = header.next_int(path);
            if (v < 0 || v > maxval) throw Error("PGM sample out of range in " + path.string());
            p = static_cast<std::uint8_t>(v);
        }
    }
    return {static_cast<int>(width), static_cast<int>(height), std::move(pixels)};
}

GrayImage load_png(const fs::path& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str()))
        throw Error("cannot read PNG " + path.string() + ": " + png.message);
    if (png.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&png);
        throw Error("unsupported bit depth (16-bit PNG): " + path.string());
    }
    if (png.width == 0 || png.height == 0) {
        png_image_free(&png);
        throw Error("zero-sized image: " + path.string());
    }
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGBA : PNG_FORMAT_GA;
    const std::size_t channels = color ? 4 : 2;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw Error("cannot decode PNG " + path.string() + ": " + msg);
    }
    const auto count = static_cast<std::size_t>(png.width) * png.height;
    std::vector<std::uint8_t> pixels(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* px = &buffer[i * channels];
        pixels[i] = color ? luminance(px[0], px[1], px[2]) : px[0];
    }
    return {static_cast<int>(png.width), static_cast<int>(png.height), std::move(pixels)};
}

}  // namespace

GrayImage load_grayscale(const fs::path& path) {
    const std::string data = read_all(path);
    if (data.size() >= 2 && data[0] == 'P' && (data[1] == '2' || data[1] == '5'))
        return load_pgm(path, data);
    static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (data.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, data.begin(),
                                       [](unsigned char a, char b) {
                                           return a == static_cast<unsigned char>(b);
                                       }))
        return load_png(path);
    throw Error("unsupported image format: " + path.string());
}

void save_pgm(const GrayImage& image, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
    const auto px = image.pixels();
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out) throw Error("write failed: " + path.string());
}

void save_png(const fs::path& path, int width, int height, int channels,
              std::span<const std::uint8_t> data) {
    if (channels != 1 && channels != 3) throw Error("save_png: channels must be 1 or 3");
    if (data.size() != static_cast<std::size_t>(width) * height * channels)
        throw Error("save_png: buffer size mismatch");
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(width);
    png.height = static_cast<png_uint_32>(height);
    png.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.c_str(), 0, data.data(), 0, nullptr))
        throw Error("cannot write PNG " + path.string() + ": " + png.message);
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open manifest " + path.string());
    const fs::path base = path.parent_path();
    std::string line;
    if (!detail::read_line(in, line)) throw Error("manifest missing header `path,label`");
    const auto header = detail::split_csv(line);
    if (header.size() != 2 || header[0] != "path" || header[1] != "label")
        throw Error("manifest missing header `path,label`");
    std::vector<ManifestEntry> entries;
    std::size_t line_no = 1;
    while (detail::read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != 2)
            throw Error("manifest line " + std::to_string(line_no) + ": expected 2 columns");
        int label = -1;
        auto [ptr, ec] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), label);
        if (ec != std::errc{} || ptr != cells[1].data() + cells[1].size())
            throw Error("manifest line " + std::to_string(line_no) + ": non-integer label");
        if (label < 0 || label >= kClassCount)
            throw Error("manifest line " + std::to_string(line_no) + ": label out of range");
        fs::path p(cells[0]);
        if (p.is_relative()) p = base / p;
        entries.push_back({std::move(p), label});
    }
    return entries;
}

void write_manifest(const fs::path& path, std::span<const ManifestEntry> entries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    const fs::path base = path.parent_path();
    out << "path,label\n";
    for (const auto& e : entries) {
        fs::path p = e.image_path;
        if (!base.empty() && p.is_absolute() == base.is_absolute()) p = p.lexically_relative(base);
        out << p.generic_string() << ',' << e.label << '\n';
    }
}

}  // namespace bettiml
