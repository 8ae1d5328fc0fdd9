#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "ssd/error.hpp"
#include "ssd/image.hpp"

using namespace ssd;
using testing::random_image;

TEST_CASE("image construction validates shape") {
    CHECK_THROWS_AS(Image(0, 3, 1), ShapeError);
    CHECK_THROWS_AS(Image(2, 2, 1, std::vector<double>(3)), ShapeError);
    Image img(2, 3, 3, 0.25);
    CHECK(img.size() == 18);
    CHECK(img.index(1, 2, 1) == (1 * 3 + 2) * 3 + 1);
}

TEST_CASE("pixel_at boundary policies") {
    Image img(3, 3, 1, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(pixel_at(img, -1, 0, 0, BoundaryPolicy::Replicate) == 1.0);
    CHECK(pixel_at(img, -1, 0, 0, BoundaryPolicy::Zero) == 0.0);
    CHECK(pixel_at(img, 1, 1, 0, BoundaryPolicy::Zero) == 5.0);

    // Reflect on a 3-row axis without repeating the edge: rows ... 2 1 [0 1 2] 1 0 ...
    CHECK(pixel_at(img, 3, 0, 0, BoundaryPolicy::Reflect) == 4.0);
    CHECK(pixel_at(img, 4, 0, 0, BoundaryPolicy::Reflect) == 1.0);
    CHECK(pixel_at(img, -1, 0, 0, BoundaryPolicy::Reflect) == 4.0);
    CHECK(pixel_at(img, -2, 0, 0, BoundaryPolicy::Reflect) == 7.0);
    CHECK(pixel_at(img, 0, 5, 0, BoundaryPolicy::Reflect) == 2.0);
}

TEST_CASE("resolve_index maps every signed index into range") {
    for (std::ptrdiff_t extent : {1, 2, 3, 7}) {
        for (std::ptrdiff_t i = -25; i <= 25; ++i) {
            for (auto p : {BoundaryPolicy::Replicate, BoundaryPolicy::Reflect}) {
                const auto j = resolve_index(i, extent, p);
                CHECK(j >= 0);
                CHECK(j < extent);
                CHECK(resolve_index(j, extent, p) == j);
            }
            const auto z = resolve_index(i, extent, BoundaryPolicy::Zero);
            CHECK(z == ((i >= 0 && i < extent) ? i : -1));
        }
    }
}

TEST_CASE("gradient") {
    SUBCASE("hand example with replicated ends") {
        Image row(1, 3, 1, std::vector<double>{0.0, 0.5, 1.0});
        const auto g = gradient(row, BoundaryPolicy::Replicate);
        CHECK(g.dx(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(g.dx(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(g.dx(0, 2) == doctest::Approx(0.25).epsilon(1e-15));
        for (double v : g.dy.data()) CHECK(v == 0.0);
    }
    SUBCASE("constant image gives zero for every policy") {
        for (auto p : {BoundaryPolicy::Replicate, BoundaryPolicy::Reflect}) {
            const auto g = gradient(Image(4, 5, 3, 0.7), p);
            for (double v : g.dx.data()) CHECK(v == 0.0);
            for (double v : g.dy.data()) CHECK(v == 0.0);
            const auto lap = laplacian(Image(4, 5, 3, 0.7), p);
            for (double v : lap.data()) CHECK(v == 0.0);
        }
    }
    SUBCASE("linear ramp interior") {
        const std::size_t w = 9;
        Image ramp(4, w, 1);
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < w; ++c) ramp(r, c) = static_cast<double>(c) / (w - 1);
        const auto g = gradient(ramp);
        const auto lap = laplacian(ramp);
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 1; c + 1 < w; ++c) {
                CHECK(g.dx(r, c) == doctest::Approx(1.0 / (w - 1)).epsilon(1e-14));
                CHECK(std::abs(lap(r, c)) < 1e-15);
            }
        }
    }
}

TEST_CASE("laplacian") {
    Image impulse(3, 3, 1, 0.0);
    impulse(1, 1) = 1.0;
    const auto lap = laplacian(impulse, BoundaryPolicy::Zero);
    CHECK(lap(1, 1) == -4.0);
    CHECK(lap(0, 1) == 1.0);
    CHECK(lap(1, 0) == 1.0);
    CHECK(lap(1, 2) == 1.0);
    CHECK(lap(2, 1) == 1.0);
    CHECK(lap(0, 0) == 0.0);

    // Backward difference of the forward difference on interiors.
    const auto img = random_image(8, 9, 2, 17);
    for (std::size_t r = 1; r + 1 < 8; ++r) {
        for (std::size_t c = 1; c + 1 < 9; ++c) {
            for (std::size_t ch = 0; ch < 2; ++ch) {
                auto fx = [&](std::size_t rr, std::size_t cc) { return img(rr, cc + 1, ch) - img(rr, cc, ch); };
                auto fy = [&](std::size_t rr, std::size_t cc) { return img(rr + 1, cc, ch) - img(rr, cc, ch); };
                const double div = (fx(r, c) - fx(r, c - 1)) + (fy(r, c) - fy(r - 1, c));
                CHECK(std::abs(laplacian(img)(r, c, ch) - div) < 1e-12);
            }
        }
    }
}

TEST_CASE("linf_distance is a metric") {
    const auto a = random_image(5, 6, 3, 1);
    CHECK(linf_distance(a, a) == 0.0);
    Image b = a;
    b(2, 3, 1) += 0.05;
    CHECK(linf_distance(a, b) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK_THROWS_AS(linf_distance(a, Image(5, 6, 1)), ShapeError);

    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        const auto x = random_image(4, 4, 1, 100 + t);
        Image y = x;
        for (double& v : y.data()) v = std::clamp(v + rng.uniform(-0.1, 0.1), 0.0, 1.0);
        CHECK(linf_distance(x, y) <= 0.1);
        const auto z = random_image(4, 4, 1, 200 + t);
        CHECK(linf_distance(x, y) == linf_distance(y, x));
        CHECK(linf_distance(x, z) <= linf_distance(x, y) + linf_distance(y, z) + 1e-15);
    }
}

TEST_CASE("clamp01") {
    Image img(1, 3, 1, std::vector<double>{1.3, -0.2, 0.4});
    const auto c = clamp01(img);
    CHECK(c(0, 0) == 1.0);
    CHECK(c(0, 1) == 0.0);
    CHECK(c(0, 2) == 0.4);
    const auto in_range = random_image(3, 3, 3, 5);
    CHECK(clamp01(in_range) == in_range);
}

TEST_CASE("raw format round trip and errors") {
    const auto dir = testing::scratch_dir("image");
    const auto img = random_image(7, 5, 3, 42);
    save_raw(img, dir / "a.ssim");
    CHECK(load_raw(dir / "a.ssim") == img);

    auto bytes = encode_raw(img);
    CHECK(bytes.size() == 5 + 12 + 8 * img.size());
    CHECK(std::string(bytes.begin(), bytes.begin() + 5) == "SSIM1");
    CHECK(bytes[5] == 7);

    auto truncated = bytes;
    truncated.resize(truncated.size() - 3);
    CHECK_THROWS_AS(decode_raw(truncated), FormatError);
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_raw(bad), FormatError);
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_raw(trailing), FormatError);
    CHECK_THROWS_AS(load_raw(dir / "missing.ssim"), IoError);
}

TEST_CASE("png export") {
    const auto dir = testing::scratch_dir("png");
    save_png(random_image(6, 4, 1, 3), dir / "g.png");
    save_png(random_image(6, 4, 3, 3), dir / "c.png");
    std::ifstream in(dir / "c.png", std::ios::binary);
    char sig[8]{};
    in.read(sig, 8);
    CHECK(std::string(sig + 1, 3) == "PNG");
    CHECK_THROWS_AS(save_png(Image(2, 2, 2), dir / "x.png"), ShapeError);
}
