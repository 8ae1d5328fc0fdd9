#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "ssd/image.hpp"
#include "ssd/rng.hpp"

namespace testing {

inline ssd::Image random_image(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
    ssd::Image img(h, w, c);
    ssd::Rng rng(seed);
    for (double& v : img.data()) v = rng.uniform();
    return img;
}

inline double max_abs_diff(const ssd::Image& a, const ssd::Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("ssd_unit_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace testing
