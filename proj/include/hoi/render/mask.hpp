#pragma once

#include <string>
#include <vector>

#include "hoi/common.hpp"

namespace hoi::render {

/// Row-major occupancy grid with values in [0, 1].
struct Mask {
    int width = 0, height = 0;
    std::vector<double> values;

    Mask() = default;
    Mask(int w, int h, double fill = 0.0) : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return values.size(); }
    double sum() const;
    bool same_size(const Mask& o) const { return width == o.width && height == o.height; }
};

/// InputError if any value lies outside [0, 1] or the size is inconsistent.
void validate(const Mask& m, const std::string& name = "mask");

/// 1 where value >= 0.5.
Mask binarized(const Mask& m, double threshold = 0.5);

/// Area-averaging resample to (width, height).
Mask resampled(const Mask& m, int width, int height);

/// Pointwise helpers.
Mask clamp_difference(const Mask& a, const Mask& b);  // clamp(a - b, 0, 1)
double hard_iou(const Mask& a, const Mask& b);          // of the 0.5-binarized masks

/// 8-bit grayscale PNG or ASCII/binary PGM; 255 maps to 1.
Mask load_mask(const std::string& path);
void save_png(const std::string& path, const Mask& m);
void save_pgm(const std::string& path, const Mask& m);
Mask parse_pgm(const std::string& bytes, const std::string& name);

/// Version of the linked PNG codec.
std::string png_library_version();

}  // namespace hoi::render
