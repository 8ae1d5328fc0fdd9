#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace ssd {

enum class BoundaryPolicy { Replicate, Reflect, Zero };

/// Dense H x W x C image, row-major with interleaved channels:
/// index(r, c, ch) = (r * width + c) * channels + ch.
///
/// Intensities are nominally in [0,1]. Any channel count >= 1 is accepted so
/// that classifier activations can be handled by the same filters; the
/// PNG writer only accepts 1 or 3 channels.
class Image {
public:
    Image() = default;
    Image(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);
    Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::size_t index(std::size_t r, std::size_t c, std::size_t ch) const noexcept {
        return (r * width_ + c) * channels_ + ch;
    }
    double& operator()(std::size_t r, std::size_t c, std::size_t ch = 0) noexcept {
        return data_[index(r, c, ch)];
    }
    double operator()(std::size_t r, std::size_t c, std::size_t ch = 0) const noexcept {
        return data_[index(r, c, ch)];
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<double> data_;
};

/// Maps a signed index onto [0, extent) per policy. Returns -1 for Zero
/// padding when the index is out of range.
std::ptrdiff_t resolve_index(std::ptrdiff_t i, std::ptrdiff_t extent, BoundaryPolicy policy) noexcept;

double pixel_at(const Image& img, std::ptrdiff_t row, std::ptrdiff_t col, std::size_t ch,
                BoundaryPolicy policy = BoundaryPolicy::Replicate) noexcept;

struct Gradient {
    Image dx; // d/dcol
    Image dy; // d/drow
};

/// Central differences, per channel.
Gradient gradient(const Image& img, BoundaryPolicy policy = BoundaryPolicy::Replicate);

/// 5-point stencil, per channel.
Image laplacian(const Image& img, BoundaryPolicy policy = BoundaryPolicy::Replicate);

double linf_distance(const Image& a, const Image& b);

Image clamp01(Image img);

// Raw bit-exact format: "SSIM1", u32 height, width, channels (LE), f64 data (LE).
void save_raw(const Image& img, const std::filesystem::path& path);
Image load_raw(const std::filesystem::path& path);
std::vector<unsigned char> encode_raw(const Image& img);
Image decode_raw(std::span<const unsigned char> bytes);

/// 8-bit PNG (grayscale or RGB); values are clamped and rounded.
void save_png(const Image& img, const std::filesystem::path& path);

} // namespace ssd
