#include <fstream>

#include "doctest.h"

#include "bettiml/error.hpp"
#include "bettiml/imaging.hpp"
#include "test_support.hpp"

using namespace bettiml;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("PGM loading") {
    testing::TempDir dir("imaging");

    SUBCASE("1x1 ASCII") {
        write_text(dir / "a.pgm", "P2\n1 1\n255\n0\n");
        CHECK(load_grayscale(dir / "a.pgm") == GrayImage(1, 1, {0}));
    }
    SUBCASE("2x2 row-major with comments") {
        write_text(dir / "b.pgm", "P2\n# comment\n2 2\n# another\n255\n1 2\n3 4\n");
        const auto img = load_grayscale(dir / "b.pgm");
        CHECK(img == GrayImage(2, 2, {1, 2, 3, 4}));
        CHECK(img.at(1, 0) == 3);
    }
    SUBCASE("binary") {
        write_text(dir / "c.pgm", std::string("P5\n3 1\n255\n") + '\x05' + '\x09' + '\xff');
        CHECK(load_grayscale(dir / "c.pgm") == GrayImage(3, 1, {5, 9, 255}));
    }
    SUBCASE("16-bit rejected") {
        write_text(dir / "d.pgm", "P2\n1 1\n65535\n300\n");
        CHECK_THROWS_WITH_AS(load_grayscale(dir / "d.pgm"), doctest::Contains("bit depth"), Error);
    }
    SUBCASE("zero-sized rejected") {
        write_text(dir / "e.pgm", "P2\n0 3\n255\n");
        CHECK_THROWS_WITH_AS(load_grayscale(dir / "e.pgm"), doctest::Contains("zero-sized"), Error);
    }
    SUBCASE("unreadable") {
        CHECK_THROWS_AS(load_grayscale(dir / "missing.pgm"), Error);
        write_text(dir / "f.txt", "hello");
        CHECK_THROWS_AS(load_grayscale(dir / "f.txt"), Error);
    }
}

TEST_CASE("PGM save/load round trip is bit-identical") {
    testing::TempDir dir("imaging_rt");
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        const auto img = testing::random_image(rng, 1 + static_cast<int>(rng.below(17)),
                                               1 + static_cast<int>(rng.below(17)));
        save_pgm(img, dir / "x.pgm");
        const auto back = load_grayscale(dir / "x.pgm");
        REQUIRE(back == img);
        save_pgm(back, dir / "y.pgm");
        std::ifstream a(dir / "x.pgm", std::ios::binary), b(dir / "y.pgm", std::ios::binary);
        const std::string sa{std::istreambuf_iterator<char>(a), {}};
        const std::string sb{std::istreambuf_iterator<char>(b), {}};
        CHECK(sa == sb);
    }
}

TEST_CASE("PNG loading and luminance") {
    testing::TempDir dir("png");

    SUBCASE("RGB pixel (100,150,200) -> 141") {
        const std::uint8_t px[3] = {100, 150, 200};
        save_png(dir / "rgb.png", 1, 1, 3, px);
        CHECK(load_grayscale(dir / "rgb.png") == GrayImage(1, 1, {141}));
    }
    SUBCASE("gray PNG passes through") {
        const std::uint8_t px[6] = {0, 1, 2, 253, 254, 255};
        save_png(dir / "g.png", 3, 2, 1, px);
        CHECK(load_grayscale(dir / "g.png") == GrayImage(3, 2, {0, 1, 2, 253, 254, 255}));
    }
}

TEST_CASE("luminance of gray RGB is exact for every level") {
    for (int v = 0; v < 256; ++v) {
        const auto u = static_cast<std::uint8_t>(v);
        REQUIRE(luminance(u, u, u) == u);
    }
    CHECK(luminance(100, 150, 200) == 141);
    CHECK(luminance(255, 0, 0) == 76);  // 76.245
}

TEST_CASE("GrayImage invariants") {
    CHECK_THROWS_AS(GrayImage(0, 1, std::vector<std::uint8_t>{}), Error);
    CHECK_THROWS_AS(GrayImage(2, 2, std::vector<std::uint8_t>{1, 2, 3}), Error);
    const GrayImage img(3, 2, {1, 2, 3, 4, 5, 6});
    // clockwise rotation of [[1,2,3],[4,5,6]] is [[4,1],[5,2],[6,3]]
    CHECK(rotate90(img) == GrayImage(2, 3, {4, 1, 5, 2, 6, 3}));
    CHECK(rotate90(rotate90(rotate90(rotate90(img)))) == img);
    CHECK(flip_horizontal(img) == GrayImage(3, 2, {3, 2, 1, 6, 5, 4}));
    CHECK(flip_vertical(img) == GrayImage(3, 2, {4, 5, 6, 1, 2, 3}));
}

TEST_CASE("manifest parsing") {
    testing::TempDir dir("manifest");

    SUBCASE("entries in order, paths relative to the manifest") {
        write_text(dir / "m.csv", "path,label\na.pgm,0\nsub/b.pgm,3\n");
        const auto m = read_manifest(dir / "m.csv");
        REQUIRE(m.size() == 2);
        CHECK(m[0].image_path == dir.path() / "a.pgm");
        CHECK(m[0].label == 0);
        CHECK(m[1].image_path == dir.path() / "sub/b.pgm");
        CHECK(m[1].label == 3);
    }
    SUBCASE("CRLF accepted") {
        write_text(dir / "m.csv", "path,label\r\na.pgm,2\r\n");
        const auto m = read_manifest(dir / "m.csv");
        REQUIRE(m.size() == 1);
        CHECK(m[0].label == 2);
    }
    SUBCASE("header only") {
        write_text(dir / "m.csv", "path,label\n");
        CHECK(read_manifest(dir / "m.csv").empty());
    }
    SUBCASE("label out of range") {
        write_text(dir / "m.csv", "path,label\na.pgm,4\n");
        CHECK_THROWS_WITH_AS(read_manifest(dir / "m.csv"), doctest::Contains("label out of range"),
                             Error);
    }
    SUBCASE("missing header") {
        write_text(dir / "m.csv", "a.pgm,0\n");
        CHECK_THROWS_AS(read_manifest(dir / "m.csv"), Error);
    }
    SUBCASE("missing image is not an error at parse time") {
        write_text(dir / "m.csv", "path,label\nnope.pgm,1\n");
        const auto m = read_manifest(dir / "m.csv");
        REQUIRE(m.size() == 1);
        CHECK_THROWS_AS(load_grayscale(m[0].image_path), Error);
    }
    SUBCASE("write/read round trip") {
        const std::vector<ManifestEntry> entries{{dir.path() / "img" / "x.pgm", 1},
                                                 {dir.path() / "y.png", 2}};
        write_manifest(dir / "out.csv", entries);
        const auto back = read_manifest(dir / "out.csv");
        REQUIRE(back.size() == 2);
        CHECK(back[0].image_path == entries[0].image_path);
        CHECK(back[1].label == 2);
    }
}
