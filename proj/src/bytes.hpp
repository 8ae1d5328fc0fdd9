#pragma once

// Little-endian byte packing shared by the raw image and model file formats.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssd/error.hpp"

namespace ssd::detail {

class ByteWriter {
public:
    void raw(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

    template <typename T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) {
            std::reverse(b, b + sizeof(T));
        }
        buf_.insert(buf_.end(), b, b + sizeof(T));
    }

    void u32(std::uint32_t v) { put(v); }
    void u64(std::uint64_t v) { put(v); }
    void f64(double v) { put(v); }

    const std::vector<unsigned char>& bytes() const noexcept { return buf_; }
    std::vector<unsigned char> take() noexcept { return std::move(buf_); }

private:
    std::vector<unsigned char> buf_;
};

/// Bounds-checked reader; every failure reports the byte offset.
class ByteReader {
public:
    ByteReader(std::span<const unsigned char> bytes, std::string what)
        : bytes_(bytes), what_(std::move(what)) {}

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw FormatError(what_ + ": " + msg + " at offset " + std::to_string(pos_));
    }

    void expect(std::string_view magic) {
        if (remaining() < magic.size() ||
            std::memcmp(bytes_.data() + pos_, magic.data(), magic.size()) != 0) {
            fail("bad magic, expected \"" + std::string(magic) + "\"");
        }
        pos_ += magic.size();
    }

    template <typename T>
    T get() {
        if (remaining() < sizeof(T)) fail("truncated");
        unsigned char b[sizeof(T)];
        std::memcpy(b, bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) {
            std::reverse(b, b + sizeof(T));
        }
        T v;
        std::memcpy(&v, b, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    std::uint32_t u32() { return get<std::uint32_t>(); }
    std::uint64_t u64() { return get<std::uint64_t>(); }
    double f64() { return get<double>(); }

private:
    std::span<const unsigned char> bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const unsigned char> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

/// 64-bit FNV-1a, hex encoded. Used for model and config fingerprints.
std::string fnv1a_hex(std::span<const unsigned char> bytes);

} // namespace ssd::detail
