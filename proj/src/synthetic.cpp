#include "resguide/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "resguide/embedding.hpp"

namespace resguide {
namespace {

std::uint8_t clamp_pixel(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

Image make_textured_cover(std::size_t width, std::size_t height, std::uint64_t seed) {
    Image img(width, height);
    const double w = static_cast<double>(width);
    const double h = static_cast<double>(height);
    // Patch layout varies with the seed.
    const double cx = w * (0.25 + 0.5 * keyed_uniform(seed, 11, 0));
    const double cy = h * (0.25 + 0.5 * keyed_uniform(seed, 11, 1));
    const double radius = 0.22 * std::min(w, h) * (0.8 + 0.4 * keyed_uniform(seed, 11, 2));
    const double angle = std::numbers::pi * keyed_uniform(seed, 11, 3);
    const double period = 3.0 + 4.0 * keyed_uniform(seed, 11, 4);
    const double edge_x = w * (0.55 + 0.3 * keyed_uniform(seed, 11, 5));

    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            const double fx = static_cast<double>(x);
            const double fy = static_cast<double>(y);
            const std::size_t i = y * width + x;
            double v = 70.0 + 90.0 * fy / h + 20.0 * fx / w;
            const double noise = keyed_uniform(seed, 12, i) - 0.5;
            if (std::hypot(fx - cx, fy - cy) < radius) {
                v += 70.0 * noise;
            }
            if (fy < 0.35 * h && fx < 0.5 * w) {
                const double phase = (fx * std::cos(angle) + fy * std::sin(angle)) * 2.0 * std::numbers::pi / period;
                v += 25.0 * std::sin(phase) + 12.0 * noise;
            }
            if (fy > 0.6 * h && fx > edge_x) {
                v += 45.0 + 30.0 * noise;
            }
            img(y, x) = clamp_pixel(v);
        }
    }
    return img;
}

Image make_quadrant_cover(std::size_t width, std::size_t height, std::uint64_t seed) {
    Image img(width, height, 128);
    for (std::size_t y = 0; y < height / 2; ++y) {
        for (std::size_t x = 0; x < width / 2; ++x) {
            img(y, x) = clamp_pixel(128.0 + 200.0 * (keyed_uniform(seed, 13, y * width + x) - 0.5));
        }
    }
    return img;
}

}  // namespace resguide
