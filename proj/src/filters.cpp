#include "ssd/filters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "ssd/error.hpp"

namespace ssd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

// One channel copied into a buffer with `pad` samples of border on each side,
// filled per boundary policy. Keeps the inner loops free of index resolution.
class PaddedPlane {
public:
    PaddedPlane(const Image& img, std::size_t ch, int pad, BoundaryPolicy policy)
        : pad_(pad), stride_(static_cast<std::ptrdiff_t>(img.width()) + 2 * pad) {
        const auto h = static_cast<std::ptrdiff_t>(img.height());
        const auto w = static_cast<std::ptrdiff_t>(img.width());
        data_.resize(static_cast<std::size_t>((h + 2 * pad) * stride_));
        for (std::ptrdiff_t r = -pad; r < h + pad; ++r) {
            for (std::ptrdiff_t c = -pad; c < w + pad; ++c) {
                data_[static_cast<std::size_t>((r + pad) * stride_ + (c + pad))] = pixel_at(img, r, c, ch, policy);
            }
        }
    }

    double at(std::ptrdiff_t r, std::ptrdiff_t c) const noexcept {
        return data_[static_cast<std::size_t>((r + pad_) * stride_ + (c + pad_))];
    }

private:
    int pad_;
    std::ptrdiff_t stride_;
    std::vector<double> data_;
};

void require_odd_size(int size, const char* what) {
    if (size < 1 || size % 2 == 0) {
        throw ParameterError(std::string(what) + " must be an odd positive integer, got " + std::to_string(size));
    }
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParameterError(std::string(what) + " must be > 0, got " + std::to_string(v));
    }
}

void require_iterations(int n) {
    if (n < 0) throw ParameterError("iterations must be >= 0, got " + std::to_string(n));
}

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e9; }

} // namespace

std::string_view to_string(SmoothingMethod m) noexcept {
    switch (m) {
    case SmoothingMethod::Mean: return "mean";
    case SmoothingMethod::Median: return "median";
    case SmoothingMethod::Gaussian: return "gaussian";
    case SmoothingMethod::AnisotropicDiffusion: return "anisotropic_diffusion";
    case SmoothingMethod::Bilateral: return "bilateral";
    case SmoothingMethod::NonLocalMeans: return "non_local_means";
    case SmoothingMethod::ModifiedCurvatureMotion: return "modified_curvature_motion";
    }
    return "unknown";
}

SmoothingMethod parse_method(std::string_view name) {
    for (auto m : {SmoothingMethod::Mean, SmoothingMethod::Median, SmoothingMethod::Gaussian,
                   SmoothingMethod::AnisotropicDiffusion, SmoothingMethod::Bilateral, SmoothingMethod::NonLocalMeans,
                   SmoothingMethod::ModifiedCurvatureMotion}) {
        if (to_string(m) == name) return m;
    }
    throw ParameterError("unknown smoothing method \"" + std::string(name) + "\"");
}

std::string_view to_string(BoundaryPolicy p) noexcept {
    switch (p) {
    case BoundaryPolicy::Replicate: return "replicate";
    case BoundaryPolicy::Reflect: return "reflect";
    case BoundaryPolicy::Zero: return "zero";
    }
    return "replicate";
}

BoundaryPolicy parse_boundary(std::string_view name) {
    if (name == "replicate") return BoundaryPolicy::Replicate;
    if (name == "reflect") return BoundaryPolicy::Reflect;
    if (name == "zero") return BoundaryPolicy::Zero;
    throw ParameterError("unknown boundary policy \"" + std::string(name) + "\"");
}

double DiffusionCoefficient::operator()(double grad_norm) const noexcept {
    const double s = grad_norm / k;
    return kind == Kind::Exponential ? std::exp(-s * s) : 1.0 / (1.0 + s * s);
}

// ---------------------------------------------------------------------------
// SmootherSpec

SmoothingMethod SmootherSpec::method() const noexcept { return static_cast<SmoothingMethod>(params.index()); }

bool SmootherSpec::iterative() const noexcept {
    return std::holds_alternative<DiffusionParams>(params) || std::holds_alternative<CurvatureMotionParams>(params);
}

std::vector<std::string> strength_params(SmoothingMethod m) {
    switch (m) {
    case SmoothingMethod::Mean:
    case SmoothingMethod::Median: return {"kernel_size"};
    case SmoothingMethod::Gaussian: return {"sigma"};
    case SmoothingMethod::AnisotropicDiffusion:
    case SmoothingMethod::ModifiedCurvatureMotion: return {"iterations"};
    case SmoothingMethod::Bilateral: return {"diameter"};
    case SmoothingMethod::NonLocalMeans: return {"patch_radius", "h_filter"};
    }
    return {};
}

std::string default_strength_param(SmoothingMethod m) { return strength_params(m).front(); }

SmootherSpec SmootherSpec::defaults(SmoothingMethod method) {
    SmootherSpec s;
    switch (method) {
    case SmoothingMethod::Mean: s.params = MeanParams{}; break;
    case SmoothingMethod::Median: s.params = MedianParams{}; break;
    case SmoothingMethod::Gaussian: s.params = GaussianParams{}; break;
    case SmoothingMethod::AnisotropicDiffusion: s.params = DiffusionParams{}; break;
    case SmoothingMethod::Bilateral: s.params = BilateralParams{}; break;
    case SmoothingMethod::NonLocalMeans: s.params = NonLocalMeansParams{}; break;
    case SmoothingMethod::ModifiedCurvatureMotion: s.params = CurvatureMotionParams{}; break;
    }
    s.strength_param = default_strength_param(method);
    return s;
}

double SmootherSpec::strength() const {
    return std::visit(
        overloaded{
            [&](const MeanParams& p) -> double { return p.kernel_size; },
            [&](const MedianParams& p) -> double { return p.kernel_size; },
            [&](const GaussianParams& p) -> double { return p.sigma; },
            [&](const DiffusionParams& p) -> double { return p.iterations; },
            [&](const BilateralParams& p) -> double { return p.diameter; },
            [&](const NonLocalMeansParams& p) -> double {
                return strength_param == "h_filter" ? p.h_filter : static_cast<double>(p.patch_radius);
            },
            [&](const CurvatureMotionParams& p) -> double { return p.iterations; },
        },
        params);
}

SmootherSpec SmootherSpec::with_strength(double level) const {
    const auto names = strength_params(method());
    if (std::find(names.begin(), names.end(), strength_param) == names.end()) {
        throw ParameterError("\"" + strength_param + "\" is not a strength parameter of " +
                             std::string(to_string(method())));
    }
    auto bad = [&](const char* why) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%g", level);
        return ParameterError("invalid level " + std::string(buf) + " for " + strength_param + ": " + why);
    };
    auto odd_int = [&]() {
        if (!is_integer(level) || level < 1 || static_cast<long long>(level) % 2 == 0) {
            throw bad("must be an odd positive integer");
        }
        return static_cast<int>(level);
    };
    auto count = [&]() {
        if (!is_integer(level) || level < 0) throw bad("must be a non-negative integer");
        return static_cast<int>(level);
    };

    SmootherSpec out = *this;
    std::visit(overloaded{
                   [&](MeanParams& p) { p.kernel_size = odd_int(); },
                   [&](MedianParams& p) { p.kernel_size = odd_int(); },
                   [&](GaussianParams& p) {
                       if (!(level > 0) || !std::isfinite(level)) throw bad("must be > 0");
                       p.sigma = level;
                   },
                   [&](DiffusionParams& p) { p.iterations = count(); },
                   [&](BilateralParams& p) { p.diameter = odd_int(); },
                   [&](NonLocalMeansParams& p) {
                       if (strength_param == "h_filter") {
                           if (!(level > 0) || !std::isfinite(level)) throw bad("must be > 0");
                           p.h_filter = level;
                       } else {
                           if (!is_integer(level) || level < 1) throw bad("must be a positive integer");
                           if (level > p.search_radius) throw bad("must not exceed search_radius");
                           p.patch_radius = static_cast<int>(level);
                       }
                   },
                   [&](CurvatureMotionParams& p) { p.iterations = count(); },
               },
               out.params);
    return out;
}

void validate(const SmootherSpec& spec) {
    const auto names = strength_params(spec.method());
    if (std::find(names.begin(), names.end(), spec.strength_param) == names.end()) {
        throw ParameterError("\"" + spec.strength_param + "\" is not a strength parameter of " +
                             std::string(to_string(spec.method())));
    }
    std::visit(overloaded{
                   [](const MeanParams& p) { require_odd_size(p.kernel_size, "kernel_size"); },
                   [](const MedianParams& p) { require_odd_size(p.kernel_size, "kernel_size"); },
                   [](const GaussianParams& p) {
                       require_positive(p.sigma, "sigma");
                       if (p.radius < 0) throw ParameterError("radius must be >= 0");
                   },
                   [](const DiffusionParams& p) {
                       require_iterations(p.iterations);
                       require_positive(p.coefficient.k, "K");
                       if (!(p.lambda > 0.0 && p.lambda <= 0.25)) {
                           throw ParameterError("lambda must lie in (0, 0.25] for stability, got " +
                                                std::to_string(p.lambda));
                       }
                   },
                   [](const BilateralParams& p) {
                       require_odd_size(p.diameter, "diameter");
                       require_positive(p.sigma_space, "sigma_space");
                       require_positive(p.sigma_range, "sigma_range");
                   },
                   [](const NonLocalMeansParams& p) {
                       if (p.patch_radius < 1) throw ParameterError("patch_radius must be >= 1");
                       if (p.search_radius < p.patch_radius) {
                           throw ParameterError("search_radius must be >= patch_radius");
                       }
                       require_positive(p.h_filter, "h_filter");
                       require_positive(p.a_sigma, "a_sigma");
                   },
                   [](const CurvatureMotionParams& p) {
                       require_iterations(p.iterations);
                       require_positive(p.k, "k");
                       require_positive(p.dt, "dt");
                   },
               },
               spec.params);
}

// ---------------------------------------------------------------------------
// Window filters

Image mean_filter(const Image& img, int kernel_size, BoundaryPolicy policy) {
    require_odd_size(kernel_size, "kernel_size");
    const int rad = kernel_size / 2;
    const double inv = 1.0 / (static_cast<double>(kernel_size) * kernel_size);
    Image out(img.height(), img.width(), img.channels());
    for (std::size_t ch = 0; ch < img.channels(); ++ch) {
        const PaddedPlane src(img, ch, rad, policy);
        for (std::size_t r = 0; r < img.height(); ++r) {
            for (std::size_t c = 0; c < img.width(); ++c) {
                // Accumulate offsets from the center so constant windows are exact fixed points.
                const double center = img(r, c, ch);
                double sum = 0.0;
                for (int dr = -rad; dr <= rad; ++dr) {
                    for (int dc = -rad; dc <= rad; ++dc) {
                        sum += src.at(static_cast<std::ptrdiff_t>(r) + dr, static_cast<std::ptrdiff_t>(c) + dc) - center;
                    }
                }
                out(r, c, ch) = center + sum * inv;
            }
        }
    }
    return out;
}

Image median_filter(const Image& img, int kernel_size, BoundaryPolicy policy) {
    require_odd_size(kernel_size, "kernel_size");
    const int rad = kernel_size / 2;
    Image out(img.height(), img.width(), img.channels());
    std::vector<double> window(static_cast<std::size_t>(kernel_size) * kernel_size);
    const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    for (std::size_t ch = 0; ch < img.channels(); ++ch) {
        const PaddedPlane src(img, ch, rad, policy);
        for (std::size_t r = 0; r < img.height(); ++r) {
            for (std::size_t c = 0; c < img.width(); ++c) {
                std::size_t n = 0;
                for (int dr = -rad; dr <= rad; ++dr) {
                    for (int dc = -rad; dc <= rad; ++dc) {
                        window[n++] = src.at(static_cast<std::ptrdiff_t>(r) + dr, static_cast<std::ptrdiff_t>(c) + dc);
                    }
                }
                std::nth_element(window.begin(), mid, window.end());
                out(r, c, ch) = *mid;
            }
        }
    }
    return out;
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
    require_positive(sigma, "sigma");
    if (radius < 0) throw ParameterError("radius must be >= 0");
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        const double v = std::exp(-(static_cast<double>(t) * t) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(t + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

Image gaussian_filter(const Image& img, double sigma, int radius, BoundaryPolicy policy) {
    require_positive(sigma, "sigma");
    if (radius <= 0) radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    const auto taps = gaussian_kernel(sigma, radius);
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    const auto w = static_cast<std::ptrdiff_t>(img.width());

    Image horiz(img.height(), img.width(), img.channels());
    for (std::ptrdiff_t r = 0; r < h; ++r) {
        for (std::ptrdiff_t c = 0; c < w; ++c) {
            for (std::size_t ch = 0; ch < img.channels(); ++ch) {
                double acc = 0.0;
                for (int t = -radius; t <= radius; ++t) {
                    acc += taps[static_cast<std::size_t>(t + radius)] * pixel_at(img, r, c + t, ch, policy);
                }
                horiz(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch) = acc;
            }
        }
    }
    Image out(img.height(), img.width(), img.channels());
    for (std::ptrdiff_t r = 0; r < h; ++r) {
        for (std::ptrdiff_t c = 0; c < w; ++c) {
            for (std::size_t ch = 0; ch < img.channels(); ++ch) {
                double acc = 0.0;
                for (int t = -radius; t <= radius; ++t) {
                    acc += taps[static_cast<std::size_t>(t + radius)] * pixel_at(horiz, r + t, c, ch, policy);
                }
                out(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch) = acc;
            }
        }
    }
    return out;
}

Image bilateral_filter(const Image& img, int diameter, double sigma_space, double sigma_range,
                       BoundaryPolicy policy) {
    require_odd_size(diameter, "diameter");
    require_positive(sigma_space, "sigma_space");
    require_positive(sigma_range, "sigma_range");
    const int rad = diameter / 2;
    std::vector<double> spatial(static_cast<std::size_t>(diameter) * diameter);
    for (int dr = -rad; dr <= rad; ++dr) {
        for (int dc = -rad; dc <= rad; ++dc) {
            spatial[static_cast<std::size_t>((dr + rad) * diameter + (dc + rad))] =
                std::exp(-(dr * dr + dc * dc) / (2.0 * sigma_space * sigma_space));
        }
    }
    const double range_scale = -1.0 / (2.0 * sigma_range * sigma_range);

    Image out(img.height(), img.width(), img.channels());
    for (std::size_t ch = 0; ch < img.channels(); ++ch) {
        const PaddedPlane src(img, ch, rad, policy);
        for (std::size_t r = 0; r < img.height(); ++r) {
            for (std::size_t c = 0; c < img.width(); ++c) {
                const double center = img(r, c, ch);
                double num = 0.0;
                double norm = 0.0;
                for (int dr = -rad; dr <= rad; ++dr) {
                    for (int dc = -rad; dc <= rad; ++dc) {
                        const double q = src.at(static_cast<std::ptrdiff_t>(r) + dr, static_cast<std::ptrdiff_t>(c) + dc);
                        const double d = q - center;
                        const double wgt =
                            spatial[static_cast<std::size_t>((dr + rad) * diameter + (dc + rad))] * std::exp(range_scale * d * d);
                        num += wgt * q;
                        norm += wgt;
                    }
                }
                out(r, c, ch) = num / norm;
            }
        }
    }
    return out;
}

Image non_local_means(const Image& img, int patch_radius, int search_radius, double h_filter, double a_sigma,
                      BoundaryPolicy policy) {
    if (patch_radius < 1) throw ParameterError("patch_radius must be >= 1");
    if (search_radius < patch_radius) throw ParameterError("search_radius must be >= patch_radius");
    require_positive(h_filter, "h_filter");
    require_positive(a_sigma, "a_sigma");

    const int pd = 2 * patch_radius + 1;
    std::vector<double> patch_w(static_cast<std::size_t>(pd) * pd);
    double wsum = 0.0;
    for (int dr = -patch_radius; dr <= patch_radius; ++dr) {
        for (int dc = -patch_radius; dc <= patch_radius; ++dc) {
            const double v = std::exp(-(dr * dr + dc * dc) / (2.0 * a_sigma * a_sigma));
            patch_w[static_cast<std::size_t>((dr + patch_radius) * pd + (dc + patch_radius))] = v;
            wsum += v;
        }
    }
    for (double& v : patch_w) v /= wsum;
    const double inv_h2 = 1.0 / (h_filter * h_filter);
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    const auto w = static_cast<std::ptrdiff_t>(img.width());

    Image out(img.height(), img.width(), img.channels());
    for (std::size_t ch = 0; ch < img.channels(); ++ch) {
        const PaddedPlane src(img, ch, patch_radius, policy);
        for (std::ptrdiff_t r = 0; r < h; ++r) {
            for (std::ptrdiff_t c = 0; c < w; ++c) {
                const std::ptrdiff_t r0 = std::max<std::ptrdiff_t>(0, r - search_radius);
                const std::ptrdiff_t r1 = std::min<std::ptrdiff_t>(h - 1, r + search_radius);
                const std::ptrdiff_t c0 = std::max<std::ptrdiff_t>(0, c - search_radius);
                const std::ptrdiff_t c1 = std::min<std::ptrdiff_t>(w - 1, c + search_radius);
                double num = 0.0;
                double norm = 0.0;
                for (std::ptrdiff_t jr = r0; jr <= r1; ++jr) {
                    for (std::ptrdiff_t jc = c0; jc <= c1; ++jc) {
                        double dist = 0.0;
                        std::size_t k = 0;
                        for (int dr = -patch_radius; dr <= patch_radius; ++dr) {
                            for (int dc = -patch_radius; dc <= patch_radius; ++dc, ++k) {
                                const double diff = src.at(r + dr, c + dc) - src.at(jr + dr, jc + dc);
                                dist += patch_w[k] * diff * diff;
                            }
                        }
                        const double wgt = std::exp(-dist * inv_h2);
                        num += wgt * src.at(jr, jc);
                        norm += wgt;
                    }
                }
                out(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch) = num / norm;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// PDE filters

Image anisotropic_diffusion_step(const Image& img, const DiffusionCoefficient& coeff, double lambda) {
    require_positive(coeff.k, "K");
    if (!(lambda > 0.0 && lambda <= 0.25)) {
        throw ParameterError("lambda must lie in (0, 0.25] for stability, got " + std::to_string(lambda));
    }
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    const auto w = static_cast<std::ptrdiff_t>(img.width());
    Image out(img.height(), img.width(), img.channels());
    for (std::ptrdiff_t r = 0; r < h; ++r) {
        for (std::ptrdiff_t c = 0; c < w; ++c) {
            const auto ur = static_cast<std::size_t>(r);
            const auto uc = static_cast<std::size_t>(c);
            for (std::size_t ch = 0; ch < img.channels(); ++ch) {
                const double center = img(ur, uc, ch);
                // Replicated neighbors give a zero difference, so no flux crosses the border.
                const double dn = pixel_at(img, r - 1, c, ch) - center;
                const double ds = pixel_at(img, r + 1, c, ch) - center;
                const double de = pixel_at(img, r, c + 1, ch) - center;
                const double dw = pixel_at(img, r, c - 1, ch) - center;
                const double flux = coeff(std::abs(dn)) * dn + coeff(std::abs(ds)) * ds + coeff(std::abs(de)) * de +
                                    coeff(std::abs(dw)) * dw;
                out(ur, uc, ch) = center + lambda * flux;
            }
        }
    }
    return out;
}

Image anisotropic_diffusion(const Image& img, int iterations, const DiffusionCoefficient& coeff, double lambda) {
    require_iterations(iterations);
    Image cur = img;
    for (int i = 0; i < iterations; ++i) cur = anisotropic_diffusion_step(cur, coeff, lambda);
    return cur;
}

Image curvature_motion_rate(const Image& img, double k) {
    require_positive(k, "k");
    const double k2inv = 1.0 / (k * k);
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    const auto w = static_cast<std::ptrdiff_t>(img.width());
    const auto nc = static_cast<std::ptrdiff_t>(img.channels());

    // Replicate boundary on all three axes; the channel axis plays z.
    auto at = [&](std::ptrdiff_t r, std::ptrdiff_t c, std::ptrdiff_t z) {
        r = std::clamp<std::ptrdiff_t>(r, 0, h - 1);
        c = std::clamp<std::ptrdiff_t>(c, 0, w - 1);
        z = std::clamp<std::ptrdiff_t>(z, 0, nc - 1);
        return img(static_cast<std::size_t>(r), static_cast<std::size_t>(c), static_cast<std::size_t>(z));
    };

    Image rate(img.height(), img.width(), img.channels());
    for (std::ptrdiff_t r = 0; r < h; ++r) {
        for (std::ptrdiff_t c = 0; c < w; ++c) {
            for (std::ptrdiff_t z = 0; z < nc; ++z) {
                const double i0 = at(r, c, z);
                const double ix = 0.5 * (at(r, c + 1, z) - at(r, c - 1, z));
                const double iy = 0.5 * (at(r + 1, c, z) - at(r - 1, c, z));
                const double iz = 0.5 * (at(r, c, z + 1) - at(r, c, z - 1));
                const double ixx = at(r, c + 1, z) - 2.0 * i0 + at(r, c - 1, z);
                const double iyy = at(r + 1, c, z) - 2.0 * i0 + at(r - 1, c, z);
                const double izz = at(r, c, z + 1) - 2.0 * i0 + at(r, c, z - 1);
                const double ixy =
                    0.25 * (at(r + 1, c + 1, z) - at(r + 1, c - 1, z) - at(r - 1, c + 1, z) + at(r - 1, c - 1, z));
                const double ixz =
                    0.25 * (at(r, c + 1, z + 1) - at(r, c - 1, z + 1) - at(r, c + 1, z - 1) + at(r, c - 1, z - 1));
                const double iyz =
                    0.25 * (at(r + 1, c, z + 1) - at(r - 1, c, z + 1) - at(r + 1, c, z - 1) + at(r - 1, c, z - 1));

                const double numer = k2inv * (ixx + iyy + izz) + (iy * iy + iz * iz) * ixx +
                                     (ix * ix + iz * iz) * iyy + (ix * ix + iy * iy) * izz -
                                     2.0 * (ix * iy * ixy + ix * iz * ixz + iy * iz * iyz);
                const double base = k2inv + ix * ix + iy * iy + iz * iz;
                rate(static_cast<std::size_t>(r), static_cast<std::size_t>(c), static_cast<std::size_t>(z)) =
                    numer / (base * base);
            }
        }
    }
    return rate;
}

Image modified_curvature_motion_step(const Image& img, double k, double dt) {
    require_positive(dt, "dt");
    Image out = curvature_motion_rate(img, k);
    const auto src = img.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const double v = src[i] + dt * dst[i];
        if (!(v >= -1.0 && v <= 2.0)) {
            throw NumericError("modified curvature motion diverged (value " + std::to_string(v) +
                               "); reduce dt");
        }
        dst[i] = v;
    }
    return out;
}

Image modified_curvature_motion(const Image& img, int iterations, double k, double dt) {
    require_iterations(iterations);
    require_positive(k, "k");
    require_positive(dt, "dt");
    Image cur = img;
    for (int i = 0; i < iterations; ++i) cur = modified_curvature_motion_step(cur, k, dt);
    return cur;
}

// ---------------------------------------------------------------------------
// Dispatch

Image apply_smoother(const SmootherSpec& spec, const Image& img) {
    validate(spec);
    Image out = std::visit(
        overloaded{
            [&](const MeanParams& p) { return mean_filter(img, p.kernel_size, p.boundary); },
            [&](const MedianParams& p) { return median_filter(img, p.kernel_size, p.boundary); },
            [&](const GaussianParams& p) { return gaussian_filter(img, p.sigma, p.radius, p.boundary); },
            [&](const DiffusionParams& p) { return anisotropic_diffusion(img, p.iterations, p.coefficient, p.lambda); },
            [&](const BilateralParams& p) {
                return bilateral_filter(img, p.diameter, p.sigma_space, p.sigma_range, p.boundary);
            },
            [&](const NonLocalMeansParams& p) {
                return non_local_means(img, p.patch_radius, p.search_radius, p.h_filter, p.a_sigma, p.boundary);
            },
            [&](const CurvatureMotionParams& p) { return modified_curvature_motion(img, p.iterations, p.k, p.dt); },
        },
        spec.params);
    return clamp01(std::move(out));
}

Image smoother_step(const SmootherSpec& spec, const Image& img) {
    if (const auto* d = std::get_if<DiffusionParams>(&spec.params)) {
        return anisotropic_diffusion_step(img, d->coefficient, d->lambda);
    }
    if (const auto* m = std::get_if<CurvatureMotionParams>(&spec.params)) {
        return modified_curvature_motion_step(img, m->k, m->dt);
    }
    throw ParameterError(std::string(to_string(spec.method())) + " is not an iterative smoother");
}

std::vector<SmootherSpec> strength_ladder(const SmootherSpec& spec, const std::vector<double>& levels) {
    std::vector<SmootherSpec> out;
    out.reserve(levels.size());
    for (double level : levels) out.push_back(spec.with_strength(level));
    return out;
}

} // namespace ssd
