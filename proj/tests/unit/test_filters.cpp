#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ssd/attacks.hpp"
#include "ssd/error.hpp"
#include "ssd/filters.hpp"

using namespace ssd;
using testing::max_abs_diff;
using testing::random_image;

namespace {

const SmoothingMethod kAllMethods[] = {
    SmoothingMethod::Mean,      SmoothingMethod::Median,        SmoothingMethod::Gaussian,
    SmoothingMethod::AnisotropicDiffusion, SmoothingMethod::Bilateral, SmoothingMethod::NonLocalMeans,
    SmoothingMethod::ModifiedCurvatureMotion,
};

// Whole-image non-local means evaluated straight from the weight formula.
struct NlmOracle {
    Image out;
    double worst_weight_sum_error = 0.0;
};

NlmOracle nlm_oracle(const Image& img, int pr, double h, double a, BoundaryPolicy policy) {
    const auto H = static_cast<std::ptrdiff_t>(img.height());
    const auto W = static_cast<std::ptrdiff_t>(img.width());
    double gsum = 0.0;
    for (int dr = -pr; dr <= pr; ++dr)
        for (int dc = -pr; dc <= pr; ++dc) gsum += std::exp(-(dr * dr + dc * dc) / (2 * a * a));

    NlmOracle o{Image(img.height(), img.width(), img.channels()), 0.0};
    for (std::size_t ch = 0; ch < img.channels(); ++ch) {
        for (std::ptrdiff_t i = 0; i < H * W; ++i) {
            const std::ptrdiff_t ir = i / W, ic = i % W;
            std::vector<double> w(static_cast<std::size_t>(H * W));
            double z = 0.0;
            for (std::ptrdiff_t j = 0; j < H * W; ++j) {
                const std::ptrdiff_t jr = j / W, jc = j % W;
                double d = 0.0;
                for (int dr = -pr; dr <= pr; ++dr) {
                    for (int dc = -pr; dc <= pr; ++dc) {
                        const double g = std::exp(-(dr * dr + dc * dc) / (2 * a * a)) / gsum;
                        const double diff = pixel_at(img, ir + dr, ic + dc, ch, policy) -
                                            pixel_at(img, jr + dr, jc + dc, ch, policy);
                        d += g * diff * diff;
                    }
                }
                w[static_cast<std::size_t>(j)] = std::exp(-d / (h * h));
                z += w[static_cast<std::size_t>(j)];
            }
            double v = 0.0, total = 0.0;
            for (std::ptrdiff_t j = 0; j < H * W; ++j) {
                const double wij = w[static_cast<std::size_t>(j)] / z;
                total += wij;
                v += wij * img(static_cast<std::size_t>(j / W), static_cast<std::size_t>(j % W), ch);
            }
            o.worst_weight_sum_error = std::max(o.worst_weight_sum_error, std::abs(total - 1.0));
            o.out(static_cast<std::size_t>(ir), static_cast<std::size_t>(ic), ch) = v;
        }
    }
    return o;
}

Image shift_right_down(const Image& img, std::size_t dr, std::size_t dc) {
    Image out(img.height(), img.width(), img.channels());
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c)
            for (std::size_t ch = 0; ch < img.channels(); ++ch)
                out(r, c, ch) = img((r + img.height() - dr) % img.height(), (c + img.width() - dc) % img.width(), ch);
    return out;
}

} // namespace

TEST_CASE("every smoother fixes constant images") {
    for (auto m : kAllMethods) {
        CAPTURE(to_string(m));
        SmootherSpec spec = SmootherSpec::defaults(m);
        if (m == SmoothingMethod::NonLocalMeans) spec.params = NonLocalMeansParams{2, 4, 0.1, 1.0};
        for (std::size_t ch : {1u, 3u}) {
            const Image img(12, 11, ch, 0.5);
            const auto out = apply_smoother(spec, img);
            CHECK(max_abs_diff(out, img) <= 1e-12);
        }
    }
    const Image img(9, 9, 1, 0.37);
    CHECK(mean_filter(img, 5) == img);
    CHECK(median_filter(img, 5) == img);
    CHECK(anisotropic_diffusion(img, 30, {}, 0.25) == img);
    CHECK(modified_curvature_motion(img, 30, 1.0, 0.1) == img);
}

TEST_CASE("mean filter") {
    Image impulse(5, 5, 1, 0.0);
    impulse(2, 2) = 1.0;
    const auto out = mean_filter(impulse, 3, BoundaryPolicy::Zero);
    for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t c = 0; c < 5; ++c) {
            const bool inside = r >= 1 && r <= 3 && c >= 1 && c <= 3;
            CHECK(out(r, c) == doctest::Approx(inside ? 1.0 / 9.0 : 0.0).epsilon(1e-15));
        }
    }
    const auto img = random_image(6, 7, 3, 4);
    CHECK(mean_filter(img, 1) == img);
    CHECK_THROWS_AS(mean_filter(img, 4), ParameterError);
    CHECK_THROWS_AS(mean_filter(img, 0), ParameterError);
    CHECK_THROWS_AS(mean_filter(img, -3), ParameterError);
}

TEST_CASE("median filter") {
    Image salt(7, 7, 1, 0.0);
    salt(3, 3) = 1.0;
    CHECK(median_filter(salt, 3)(3, 3) == 0.0);
    CHECK_THROWS_AS(median_filter(salt, 2), ParameterError);

    SUBCASE("salt-and-pepper recovery on a two-region image") {
        Image clean(64, 64, 1);
        for (std::size_t r = 0; r < 64; ++r)
            for (std::size_t c = 0; c < 64; ++c) clean(r, c) = c < 32 ? 0.25 : 0.75;
        const auto noisy = salt_pepper_noise(clean, 0.05, 2024);
        const auto out = median_filter(noisy, 3);
        std::size_t exact = 0;
        for (std::size_t i = 0; i < out.size(); ++i) exact += out.data()[i] == clean.data()[i] ? 1 : 0;
        CHECK(static_cast<double>(exact) / static_cast<double>(out.size()) >= 0.99);
    }
}

TEST_CASE("gaussian filter") {
    const auto k = gaussian_kernel(1.3, 4);
    double sum = 0.0;
    for (double v : k) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-15);
    CHECK(k.size() == 9);

    Image impulse(11, 11, 1, 0.0);
    impulse(5, 5) = 1.0;
    const auto out = gaussian_filter(impulse, 1.3, 4, BoundaryPolicy::Zero);
    double worst = 0.0;
    for (int r = 0; r < 11; ++r) {
        for (int c = 0; c < 11; ++c) {
            const int dr = r - 5, dc = c - 5;
            const double expect = (std::abs(dr) <= 4 && std::abs(dc) <= 4)
                                      ? k[static_cast<std::size_t>(dr + 4)] * k[static_cast<std::size_t>(dc + 4)]
                                      : 0.0;
            worst = std::max(worst, std::abs(out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) - expect));
        }
    }
    CHECK(worst <= 1e-12);

    const auto img = random_image(8, 8, 3, 8);
    CHECK(max_abs_diff(gaussian_filter(img, 1e-6, 0), img) <= 1e-9);
    CHECK(max_abs_diff(gaussian_filter(Image(8, 8, 1, 0.3), 2.0, 0), Image(8, 8, 1, 0.3)) <= 1e-12);
    CHECK_THROWS_AS(gaussian_filter(img, 0.0, 2), ParameterError);
    CHECK_THROWS_AS(gaussian_filter(img, -1.0, 2), ParameterError);
}

TEST_CASE("anisotropic diffusion") {
    const auto img = random_image(16, 16, 1, 77);
    CHECK(anisotropic_diffusion(img, 0, {}, 0.25) == img);
    CHECK_THROWS_AS(anisotropic_diffusion_step(img, {}, 0.3), ParameterError);
    CHECK_THROWS_AS(anisotropic_diffusion_step(img, {}, 0.0), ParameterError);
    CHECK_THROWS_AS(anisotropic_diffusion_step(img, {DiffusionCoefficient::Kind::Exponential, 0.0}, 0.2),
                    ParameterError);

    for (auto kind : {DiffusionCoefficient::Kind::Exponential, DiffusionCoefficient::Kind::Rational}) {
        const DiffusionCoefficient coeff{kind, 0.1};
        auto mean = [](const Image& im) {
            double s = 0.0;
            for (double v : im.data()) s += v;
            return s / static_cast<double>(im.size());
        };
        const double m0 = mean(img);
        Image cur = img;
        for (int it = 0; it < 30; ++it) {
            const Image next = anisotropic_diffusion_step(cur, coeff, 0.25);
            const auto [lo0, hi0] = std::minmax_element(cur.data().begin(), cur.data().end());
            const auto [lo1, hi1] = std::minmax_element(next.data().begin(), next.data().end());
            CHECK(*hi1 <= *hi0);
            CHECK(*lo1 >= *lo0);
            cur = next;
        }
        CHECK(std::abs(mean(cur) - m0) / m0 <= 1e-10);
        CHECK(anisotropic_diffusion(img, 30, coeff, 0.25) == cur);
    }

    SUBCASE("coefficient is in (0,1] and non-increasing") {
        for (auto kind : {DiffusionCoefficient::Kind::Exponential, DiffusionCoefficient::Kind::Rational}) {
            const DiffusionCoefficient c{kind, 0.1};
            CHECK(c(0.0) == 1.0);
            double prev = 1.0;
            for (double g = 0.01; g < 0.5; g += 0.01) {
                CHECK(c(g) > 0.0);
                CHECK(c(g) <= prev);
                prev = c(g);
            }
        }
    }
}

TEST_CASE("bilateral filter") {
    const auto img = random_image(12, 13, 2, 11);
    SUBCASE("large range sigma matches the spatial Gaussian average") {
        const int d = 5, rad = 2;
        const double ss = 1.5;
        const auto out = bilateral_filter(img, d, ss, 1e6);
        double worst = 0.0;
        for (std::size_t ch = 0; ch < 2; ++ch) {
            for (std::ptrdiff_t r = 0; r < 12; ++r) {
                for (std::ptrdiff_t c = 0; c < 13; ++c) {
                    double num = 0.0, den = 0.0;
                    for (int dr = -rad; dr <= rad; ++dr) {
                        for (int dc = -rad; dc <= rad; ++dc) {
                            const double g = std::exp(-(dr * dr + dc * dc) / (2 * ss * ss));
                            num += g * pixel_at(img, r + dr, c + dc, ch);
                            den += g;
                        }
                    }
                    worst = std::max(worst, std::abs(out(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch) - num / den));
                }
            }
        }
        CHECK(worst <= 1e-6);
    }
    SUBCASE("step edge is preserved") {
        Image edge(10, 10, 1);
        for (std::size_t r = 0; r < 10; ++r)
            for (std::size_t c = 0; c < 10; ++c) edge(r, c) = c < 5 ? 0.0 : 1.0;
        const auto out = bilateral_filter(edge, 5, 2.0, 0.05);
        CHECK(max_abs_diff(out, edge) < 0.01);
    }
    CHECK_THROWS_AS(bilateral_filter(img, 4, 1.0, 0.1), ParameterError);
    CHECK_THROWS_AS(bilateral_filter(img, 5, 0.0, 0.1), ParameterError);
    CHECK_THROWS_AS(bilateral_filter(img, 5, 1.0, -0.1), ParameterError);
}

TEST_CASE("non-local means") {
    SUBCASE("search window covering the image equals the whole-image formula") {
        const auto img = random_image(7, 6, 2, 5);
        for (auto policy : {BoundaryPolicy::Replicate, BoundaryPolicy::Reflect, BoundaryPolicy::Zero}) {
            const auto oracle = nlm_oracle(img, 1, 0.3, 1.0, policy);
            CHECK(oracle.worst_weight_sum_error <= 1e-12);
            CHECK(max_abs_diff(non_local_means(img, 1, 10, 0.3, 1.0, policy), oracle.out) <= 1e-12);
        }
    }
    SUBCASE("weights are a convex combination") {
        const auto img = random_image(9, 9, 1, 6);
        const auto out = non_local_means(img, 2, 3, 0.2, 1.0);
        const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
        for (double v : out.data()) {
            CHECK(v >= *lo - 1e-12);
            CHECK(v <= *hi + 1e-12);
        }
    }
    SUBCASE("periodic stripes are preserved") {
        Image stripes(10, 10, 1);
        for (std::size_t r = 0; r < 10; ++r)
            for (std::size_t c = 0; c < 10; ++c) stripes(r, c) = (c % 2 == 0) ? 0.2 : 0.8;
        const auto out = non_local_means(stripes, 1, 4, 0.1, 1.0, BoundaryPolicy::Reflect);
        CHECK(max_abs_diff(out, stripes) <= 0.05);
        CHECK(max_abs_diff(out, nlm_oracle(stripes, 1, 0.1, 1.0, BoundaryPolicy::Reflect).out) <= 0.05);
    }
    const auto img = random_image(5, 5, 1, 1);
    CHECK_THROWS_AS(non_local_means(img, 1, 3, 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(non_local_means(img, 0, 3, 0.1, 1.0), ParameterError);
    CHECK_THROWS_AS(non_local_means(img, 3, 2, 0.1, 1.0), ParameterError);
}

TEST_CASE("modified curvature motion") {
    const auto img = random_image(16, 16, 1, 99);
    CHECK(modified_curvature_motion(img, 0, 1.0, 0.1) == img);
    CHECK_THROWS_AS(modified_curvature_motion(img, 1, 0.0, 0.1), ParameterError);
    CHECK_THROWS_AS(modified_curvature_motion(img, 1, 1.0, 0.0), ParameterError);

    SUBCASE("small k approaches the heat equation") {
        const double k = 1e-3, dt = 0.1;
        const auto step = modified_curvature_motion_step(img, k, dt);
        const auto lap = laplacian(img, BoundaryPolicy::Replicate);
        const auto rate = curvature_motion_rate(img, k);
        double worst_step = 0.0, worst_rel = 0.0;
        for (std::size_t i = 0; i < img.size(); ++i) {
            const double update = step.data()[i] - img.data()[i];
            worst_step = std::max(worst_step, std::abs(update - dt * k * k * lap.data()[i]));
            worst_rel = std::max(worst_rel, std::abs(rate.data()[i] / (k * k) - lap.data()[i]));
        }
        CHECK(worst_step <= 1e-6);
        CHECK(worst_rel <= 1e-4);
    }
    SUBCASE("channel-constant color image evolves like its gray plane") {
        Image color(16, 16, 3);
        for (std::size_t r = 0; r < 16; ++r)
            for (std::size_t c = 0; c < 16; ++c)
                for (std::size_t ch = 0; ch < 3; ++ch) color(r, c, ch) = img(r, c);
        const auto g = modified_curvature_motion(img, 5, 1.0, 0.1);
        const auto cc = modified_curvature_motion(color, 5, 1.0, 0.1);
        double worst = 0.0;
        for (std::size_t r = 0; r < 16; ++r)
            for (std::size_t c = 0; c < 16; ++c)
                for (std::size_t ch = 0; ch < 3; ++ch) worst = std::max(worst, std::abs(cc(r, c, ch) - g(r, c)));
        CHECK(worst <= 1e-15);
    }
    SUBCASE("maximum principle at the default step") {
        Image cur = img;
        for (int it = 0; it < 30; ++it) {
            const Image next = modified_curvature_motion_step(cur, 1.0, 0.1);
            const auto [lo0, hi0] = std::minmax_element(cur.data().begin(), cur.data().end());
            const auto [lo1, hi1] = std::minmax_element(next.data().begin(), next.data().end());
            CHECK(*hi1 <= *hi0 + 1e-12);
            CHECK(*lo1 >= *lo0 - 1e-12);
            cur = next;
        }
    }
    SUBCASE("divergence guard") {
        CHECK_THROWS_AS(modified_curvature_motion(img, 5, 1.0, 50.0), NumericError);
    }
}

TEST_CASE("convex filters stay in range before clamping") {
    const auto img = random_image(10, 10, 1, 123);
    for (const auto& out : {mean_filter(img, 5), median_filter(img, 3), gaussian_filter(img, 1.0, 0),
                            bilateral_filter(img, 5, 1.5, 0.1), non_local_means(img, 1, 3, 0.1, 1.0),
                            anisotropic_diffusion(img, 10, {}, 0.25)}) {
        for (double v : out.data()) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("filters are translation equivariant on interiors") {
    const auto img = random_image(24, 24, 1, 31);
    const std::size_t dr = 2, dc = 3;
    const auto shifted = shift_right_down(img, dr, dc);
    for (auto m : kAllMethods) {
        CAPTURE(to_string(m));
        SmootherSpec spec = SmootherSpec::defaults(m);
        if (m == SmoothingMethod::NonLocalMeans) spec.params = NonLocalMeansParams{1, 2, 0.2, 1.0};
        if (m == SmoothingMethod::AnisotropicDiffusion || m == SmoothingMethod::ModifiedCurvatureMotion) {
            spec = spec.with_strength(3);
        }
        const auto a = apply_smoother(spec, img);
        const auto b = apply_smoother(spec, shifted);
        // Pixels farther than the support from both the border and the wrap seam.
        const std::size_t margin = 8;
        double worst = 0.0;
        for (std::size_t r = margin + dr; r + margin < 24; ++r)
            for (std::size_t c = margin + dc; c + margin < 24; ++c)
                worst = std::max(worst, std::abs(b(r, c) - a(r - dr, c - dc)));
        CHECK(worst == 0.0);
    }
}

TEST_CASE("smoother spec, dispatch and strength ladder") {
    const auto img = random_image(8, 8, 1, 2);
    CHECK(apply_smoother(SmootherSpec{MeanParams{1}, "kernel_size"}, img) == img);
    CHECK(apply_smoother(SmootherSpec::defaults(SmoothingMethod::AnisotropicDiffusion).with_strength(0), img) == img);

    for (auto m : kAllMethods) {
        const auto spec = SmootherSpec::defaults(m);
        CHECK(spec.method() == m);
        CHECK(parse_method(to_string(m)) == m);
        CHECK(spec.strength_param == default_strength_param(m));
        CHECK_NOTHROW(validate(spec));
    }
    CHECK_THROWS_AS(parse_method("sharpen"), ParameterError);

    const auto diff = SmootherSpec::defaults(SmoothingMethod::AnisotropicDiffusion);
    const auto ladder = strength_ladder(diff, {1, 2, 3, 4, 5});
    REQUIRE(ladder.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(std::get<DiffusionParams>(ladder[static_cast<std::size_t>(i)].params).iterations == i + 1);

    const auto mean = SmootherSpec::defaults(SmoothingMethod::Mean);
    const auto sizes = strength_ladder(mean, {3, 5, 7});
    CHECK(std::get<MeanParams>(sizes[2].params).kernel_size == 7);
    CHECK(strength_ladder(mean, {}).empty());
    try {
        (void)strength_ladder(mean, {3, 4});
        FAIL("expected a parameter error");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("4") != std::string::npos);
    }

    auto nlm = SmootherSpec::defaults(SmoothingMethod::NonLocalMeans);
    nlm.strength_param = "h_filter";
    CHECK(std::get<NonLocalMeansParams>(nlm.with_strength(0.3).params).h_filter == 0.3);
    nlm.strength_param = "sigma";
    CHECK_THROWS_AS(validate(nlm), ParameterError);

    CHECK(std::get<BilateralParams>(SmootherSpec::defaults(SmoothingMethod::Bilateral).with_strength(7).params).diameter == 7);
}

TEST_CASE("smoother_step composes to apply_smoother") {
    const auto img = random_image(12, 12, 1, 21);
    for (auto m : {SmoothingMethod::AnisotropicDiffusion, SmoothingMethod::ModifiedCurvatureMotion}) {
        auto spec = SmootherSpec::defaults(m);
        Image cur = img;
        for (int n = 1; n <= 6; ++n) {
            cur = smoother_step(spec, cur);
            CHECK(clamp01(cur) == apply_smoother(spec.with_strength(n), img));
        }
    }
    CHECK_THROWS_AS(smoother_step(SmootherSpec::defaults(SmoothingMethod::Mean), img), ParameterError);
}

TEST_CASE("filters are deterministic") {
    const auto img = random_image(14, 14, 3, 55);
    for (auto m : kAllMethods) {
        SmootherSpec spec = SmootherSpec::defaults(m);
        if (m == SmoothingMethod::NonLocalMeans) spec.params = NonLocalMeansParams{1, 3, 0.1, 1.0};
        CHECK(apply_smoother(spec, img) == apply_smoother(spec, img));
    }
}
