#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ssd/image.hpp"

namespace ssd {

enum class SmoothingMethod {
    Mean,
    Median,
    Gaussian,
    AnisotropicDiffusion,
    Bilateral,
    NonLocalMeans,
    ModifiedCurvatureMotion,
};

std::string_view to_string(SmoothingMethod m) noexcept;
SmoothingMethod parse_method(std::string_view name);

/// Edge-stopping function of Perona-Malik diffusion. Both variants map a
/// gradient magnitude to (0, 1] and are non-increasing in it.
struct DiffusionCoefficient {
    enum class Kind { Exponential, Rational };
    Kind kind = Kind::Exponential;
    double k = 0.1;

    double operator()(double grad_norm) const noexcept;
    friend bool operator==(const DiffusionCoefficient&, const DiffusionCoefficient&) = default;
};

// Per-method parameter sets. Sizes are odd; radius 0 for the Gaussian means
// ceil(3 sigma).
struct MeanParams {
    int kernel_size = 3;
    BoundaryPolicy boundary = BoundaryPolicy::Replicate;
    friend bool operator==(const MeanParams&, const MeanParams&) = default;
};
struct MedianParams {
    int kernel_size = 3;
    BoundaryPolicy boundary = BoundaryPolicy::Replicate;
    friend bool operator==(const MedianParams&, const MedianParams&) = default;
};
struct GaussianParams {
    double sigma = 1.0;
    int radius = 0;
    BoundaryPolicy boundary = BoundaryPolicy::Replicate;
    friend bool operator==(const GaussianParams&, const GaussianParams&) = default;
};
struct DiffusionParams {
    int iterations = 10;
    DiffusionCoefficient coefficient{};
    double lambda = 0.25;
    friend bool operator==(const DiffusionParams&, const DiffusionParams&) = default;
};
struct BilateralParams {
    int diameter = 5;
    double sigma_space = 1.5;
    double sigma_range = 0.1;
    BoundaryPolicy boundary = BoundaryPolicy::Replicate;
    friend bool operator==(const BilateralParams&, const BilateralParams&) = default;
};
struct NonLocalMeansParams {
    int patch_radius = 3;
    int search_radius = 10;
    double h_filter = 0.1;
    double a_sigma = 1.0;
    BoundaryPolicy boundary = BoundaryPolicy::Replicate;
    friend bool operator==(const NonLocalMeansParams&, const NonLocalMeansParams&) = default;
};
struct CurvatureMotionParams {
    int iterations = 10;
    double k = 1.0;
    double dt = 0.1;
    friend bool operator==(const CurvatureMotionParams&, const CurvatureMotionParams&) = default;
};

using SmootherParams = std::variant<MeanParams, MedianParams, GaussianParams, DiffusionParams, BilateralParams,
                                    NonLocalMeansParams, CurvatureMotionParams>;

/// One smoothing defense with a designated strength parameter (the knob a
/// strength sweep turns).
struct SmootherSpec {
    SmootherParams params;
    std::string strength_param;

    SmoothingMethod method() const noexcept;
    bool iterative() const noexcept;

    /// Current value of the strength parameter.
    double strength() const;
    /// Returns a copy with the strength parameter set; throws ParameterError
    /// naming the level when it is invalid for the parameter.
    SmootherSpec with_strength(double level) const;

    /// Spec with defaults for `method` and its default strength parameter.
    static SmootherSpec defaults(SmoothingMethod method);

    friend bool operator==(const SmootherSpec&, const SmootherSpec&) = default;
};

std::string default_strength_param(SmoothingMethod m);
std::vector<std::string> strength_params(SmoothingMethod m);

/// Throws ParameterError when a parameter or the strength name is invalid.
void validate(const SmootherSpec& spec);

// Filters. All operate channel-by-channel except modified_curvature_motion.

Image mean_filter(const Image& img, int kernel_size, BoundaryPolicy policy = BoundaryPolicy::Replicate);
Image median_filter(const Image& img, int kernel_size, BoundaryPolicy policy = BoundaryPolicy::Replicate);

/// Sampled, normalized 1-D Gaussian taps over [-radius, radius].
std::vector<double> gaussian_kernel(double sigma, int radius);
Image gaussian_filter(const Image& img, double sigma, int radius,
                      BoundaryPolicy policy = BoundaryPolicy::Replicate);

/// One explicit Perona-Malik step with zero-flux borders.
Image anisotropic_diffusion_step(const Image& img, const DiffusionCoefficient& coeff, double lambda);
Image anisotropic_diffusion(const Image& img, int iterations, const DiffusionCoefficient& coeff, double lambda);

Image bilateral_filter(const Image& img, int diameter, double sigma_space, double sigma_range,
                       BoundaryPolicy policy = BoundaryPolicy::Replicate);

Image non_local_means(const Image& img, int patch_radius, int search_radius, double h_filter, double a_sigma,
                      BoundaryPolicy policy = BoundaryPolicy::Replicate);

/// Time derivative of modified curvature motion, treating channels as the
/// third axis of the surface.
Image curvature_motion_rate(const Image& img, double k);
Image modified_curvature_motion_step(const Image& img, double k, double dt);
Image modified_curvature_motion(const Image& img, int iterations, double k, double dt);

/// Dispatches to the filter named by spec and clamps the result to [0,1].
Image apply_smoother(const SmootherSpec& spec, const Image& img);

/// One unclamped iteration of an iterative smoother. apply_smoother with n
/// iterations equals clamp01 of n successive steps.
Image smoother_step(const SmootherSpec& spec, const Image& img);

std::vector<SmootherSpec> strength_ladder(const SmootherSpec& spec, const std::vector<double>& levels);

std::string_view to_string(BoundaryPolicy p) noexcept;
BoundaryPolicy parse_boundary(std::string_view name);

} // namespace ssd
