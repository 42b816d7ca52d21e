#pragma once

#include <cstdint>

#include "resguide/image.hpp"

namespace resguide {

/// Smooth background with noisy patches, an oriented stripe texture and a
/// step edge. Deterministic in (width, height, seed).
Image make_textured_cover(std::size_t width, std::size_t height, std::uint64_t seed);

/// Flat mid-gray image whose top-left quadrant carries high-contrast noise.
Image make_quadrant_cover(std::size_t width, std::size_t height, std::uint64_t seed);

}  // namespace resguide
