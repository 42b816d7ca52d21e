#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace resguide {

/// Smallest side accepted for images loaded from disk.
inline constexpr std::size_t kMinCoverSide = 16;

/// 8-bit grayscale pixel grid stored row-major. Dimensions are fixed at
/// construction.
class Image {
public:
    Image() = default;
    Image(std::size_t width, std::size_t height, std::uint8_t fill = 0);
    Image(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    std::uint8_t operator()(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
    std::uint8_t& operator()(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    bool operator==(const Image&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Real-valued h x w grid (residuals, masks, probability and modification maps).
class RealMap {
public:
    RealMap() = default;
    RealMap(std::size_t width, std::size_t height, double fill = 0.0);
    RealMap(std::size_t width, std::size_t height, std::vector<double> values);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
    double& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool same_shape(const RealMap& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    /// True when every value is finite.
    bool all_finite() const noexcept;

    double sum() const noexcept;
    double max() const noexcept;

    bool operator==(const RealMap&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> values_;
};

RealMap image_to_realmap(const Image& img);

/// Throws std::invalid_argument("dimension mismatch") unless shapes agree.
void require_same_shape(const RealMap& a, const RealMap& b);

}  // namespace resguide
