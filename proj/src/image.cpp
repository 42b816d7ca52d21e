#include "resguide/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace resguide {

Image::Image(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height), pixels_(width * height, fill) {
    if (width == 0 || height == 0) {
        throw std::invalid_argument("image dimensions must be positive");
    }
}

Image::Image(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width == 0 || height == 0) {
        throw std::invalid_argument("image dimensions must be positive");
    }
    if (pixels_.size() != width * height) {
        throw std::invalid_argument("pixel count does not match dimensions");
    }
}

RealMap::RealMap(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), values_(width * height, fill) {}

RealMap::RealMap(std::size_t width, std::size_t height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (values_.size() != width * height) {
        throw std::invalid_argument("value count does not match dimensions");
    }
}

bool RealMap::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double RealMap::sum() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
}

double RealMap::max() const noexcept {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values_) m = std::max(m, v);
    return m;
}

RealMap image_to_realmap(const Image& img) {
    RealMap out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.values();
    std::transform(src.begin(), src.end(), dst.begin(), [](std::uint8_t p) { return static_cast<double>(p); });
    return out;
}

void require_same_shape(const RealMap& a, const RealMap& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("dimension mismatch");
}

}  // namespace resguide
