#include "ssd/image.hpp"

#include <algorithm>
#include <cmath>
#include <png.h>

#include "bytes.hpp"
#include "ssd/error.hpp"

namespace ssd {

namespace {

constexpr std::string_view kRawMagic = "SSIM1";

void check_shape(std::size_t h, std::size_t w, std::size_t c) {
    if (h == 0 || w == 0 || c == 0) {
        throw ShapeError("image dimensions must be positive, got " + std::to_string(h) + "x" +
                         std::to_string(w) + "x" + std::to_string(c));
    }
}

} // namespace

Image::Image(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : height_(height), width_(width), channels_(channels) {
    check_shape(height, width, channels);
    data_.assign(height * width * channels, fill);
}

Image::Image(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    check_shape(height, width, channels);
    if (data_.size() != height * width * channels) {
        throw ShapeError("image data length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(height) + "x" + std::to_string(width) + "x" +
                         std::to_string(channels));
    }
}

std::ptrdiff_t resolve_index(std::ptrdiff_t i, std::ptrdiff_t extent, BoundaryPolicy policy) noexcept {
    if (i >= 0 && i < extent) return i;
    switch (policy) {
    case BoundaryPolicy::Replicate:
        return i < 0 ? 0 : extent - 1;
    case BoundaryPolicy::Zero:
        return -1;
    case BoundaryPolicy::Reflect: {
        // mirror without repeating the edge sample: -1 -> 1, extent -> extent-2
        if (extent == 1) return 0;
        const std::ptrdiff_t period = 2 * (extent - 1);
        std::ptrdiff_t m = i % period;
        if (m < 0) m += period;
        return m < extent ? m : period - m;
    }
    }
    return 0;
}

double pixel_at(const Image& img, std::ptrdiff_t row, std::ptrdiff_t col, std::size_t ch,
                BoundaryPolicy policy) noexcept {
    const auto r = resolve_index(row, static_cast<std::ptrdiff_t>(img.height()), policy);
    const auto c = resolve_index(col, static_cast<std::ptrdiff_t>(img.width()), policy);
    if (r < 0 || c < 0) return 0.0;
    return img(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch);
}

Gradient gradient(const Image& img, BoundaryPolicy policy) {
    Gradient g{Image(img.height(), img.width(), img.channels()),
               Image(img.height(), img.width(), img.channels())};
    for (std::size_t r = 0; r < img.height(); ++r) {
        const auto ri = static_cast<std::ptrdiff_t>(r);
        for (std::size_t c = 0; c < img.width(); ++c) {
            const auto ci = static_cast<std::ptrdiff_t>(c);
            for (std::size_t ch = 0; ch < img.channels(); ++ch) {
                g.dx(r, c, ch) = 0.5 * (pixel_at(img, ri, ci + 1, ch, policy) - pixel_at(img, ri, ci - 1, ch, policy));
                g.dy(r, c, ch) = 0.5 * (pixel_at(img, ri + 1, ci, ch, policy) - pixel_at(img, ri - 1, ci, ch, policy));
            }
        }
    }
    return g;
}

Image laplacian(const Image& img, BoundaryPolicy policy) {
    Image out(img.height(), img.width(), img.channels());
    for (std::size_t r = 0; r < img.height(); ++r) {
        const auto ri = static_cast<std::ptrdiff_t>(r);
        for (std::size_t c = 0; c < img.width(); ++c) {
            const auto ci = static_cast<std::ptrdiff_t>(c);
            for (std::size_t ch = 0; ch < img.channels(); ++ch) {
                out(r, c, ch) = pixel_at(img, ri + 1, ci, ch, policy) + pixel_at(img, ri - 1, ci, ch, policy) +
                                pixel_at(img, ri, ci + 1, ch, policy) + pixel_at(img, ri, ci - 1, ch, policy) -
                                4.0 * img(r, c, ch);
            }
        }
    }
    return out;
}

double linf_distance(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw ShapeError("linf_distance: shape mismatch");
    double m = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da[i] - db[i]));
    return m;
}

Image clamp01(Image img) {
    for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
    return img;
}

std::vector<unsigned char> encode_raw(const Image& img) {
    detail::ByteWriter w;
    w.raw(kRawMagic);
    w.u32(static_cast<std::uint32_t>(img.height()));
    w.u32(static_cast<std::uint32_t>(img.width()));
    w.u32(static_cast<std::uint32_t>(img.channels()));
    for (double v : img.data()) w.f64(v);
    return w.take();
}

Image decode_raw(std::span<const unsigned char> bytes) {
    detail::ByteReader rd(bytes, "raw image");
    rd.expect(kRawMagic);
    const std::size_t h = rd.u32();
    const std::size_t w = rd.u32();
    const std::size_t c = rd.u32();
    if (h == 0 || w == 0 || c == 0) rd.fail("zero dimension");
    const std::size_t n = h * w * c;
    if (rd.remaining() != n * sizeof(double)) rd.fail("payload size mismatch");
    std::vector<double> data(n);
    for (auto& v : data) v = rd.f64();
    return Image(h, w, c, std::move(data));
}

void save_raw(const Image& img, const std::filesystem::path& path) {
    detail::write_file(path, encode_raw(img));
}

Image load_raw(const std::filesystem::path& path) {
    const auto bytes = detail::read_file(path);
    try {
        return decode_raw(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_png(const Image& img, const std::filesystem::path& path) {
    if (img.channels() != 1 && img.channels() != 3) {
        throw ShapeError("PNG export needs 1 or 3 channels, got " + std::to_string(img.channels()));
    }
    FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw IoError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("PNG encoding failed: " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
                 img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(img.width() * img.channels());
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const double v = std::clamp(img.data()[r * row.size() + i], 0.0, 1.0);
            row[i] = static_cast<png_byte>(std::lround(v * 255.0));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

} // namespace ssd
