#pragma once

#include <cstdint>

#include "resguide/guidance.hpp"
#include "resguide/image.hpp"

namespace resguide {

/// Per-pixel total change probability, every value in [0, 2/3]. The +1 and -1
/// directions each receive half of it.
class ProbabilityMap {
public:
    ProbabilityMap() = default;
    explicit ProbabilityMap(RealMap values);
    static ProbabilityMap uniform(std::size_t width, std::size_t height, double p);

    const RealMap& map() const noexcept { return values_; }
    std::size_t width() const noexcept { return values_.width(); }
    std::size_t height() const noexcept { return values_.height(); }
    double operator[](std::size_t i) const { return values_[i]; }

private:
    RealMap values_;
};

enum class ModificationMode { Relaxed, Hard };

struct ModificationMap {
    RealMap values;
    ModificationMode mode = ModificationMode::Hard;
};

/// Uniform [0,1) field drawn from a counter-based generator keyed by
/// (seed, stream, pixel index); any pixel can be regenerated independently.
struct NoiseField {
    RealMap values;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

NoiseField make_noise(std::size_t width, std::size_t height, std::uint64_t seed, std::uint64_t stream = 0);

/// Single draw of the keyed generator, in [0, 1).
double keyed_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

/// Double-tanh surrogate of the ternary sampler:
///   m = -0.5 tanh(l (p - 2n)) + 0.5 tanh(l (p - 2 (1 - n)))
ModificationMap double_tanh_relax(const ProbabilityMap& prob, const NoiseField& noise, double lambda_slope);

/// Derivative of the double-tanh surrogate with respect to p.
double double_tanh_derivative(double p, double n, double lambda_slope) noexcept;
double double_tanh_value(double p, double n, double lambda_slope) noexcept;

/// -1 if n < p/2, +1 if n > 1 - p/2, otherwise 0.
ModificationMap hard_sample(const ProbabilityMap& prob, const NoiseField& noise);

/// Y = X + M, flipping the direction at 0 and 255 so every requested change
/// still happens.
Image apply_modifications(const Image& cover, const ModificationMap& mods);

/// Total ternary entropy of the map in bits.
double payload_bits(const ProbabilityMap& prob);

/// Inverts the per-pixel ternary entropy on [0, 2/3] by bisection.
double probability_for_payload(double q);

}  // namespace resguide
