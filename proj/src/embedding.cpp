#include "resguide/embedding.hpp"

#include <cmath>
#include <stdexcept>

namespace resguide {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

ProbabilityMap::ProbabilityMap(RealMap values) : values_(std::move(values)) {
    require_probability_map(values_);
}

ProbabilityMap ProbabilityMap::uniform(std::size_t width, std::size_t height, double p) {
    return ProbabilityMap(RealMap(width, height, p));
}

double keyed_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
    const std::uint64_t key = splitmix64(seed ^ splitmix64(stream + 0x5851f42d4c957f2dULL));
    const std::uint64_t bits = splitmix64(key ^ splitmix64(index));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

NoiseField make_noise(std::size_t width, std::size_t height, std::uint64_t seed, std::uint64_t stream) {
    NoiseField noise{RealMap(width, height), seed, stream};
    for (std::size_t i = 0; i < noise.values.size(); ++i) noise.values[i] = keyed_uniform(seed, stream, i);
    return noise;
}

double double_tanh_value(double p, double n, double lambda_slope) noexcept {
    return -0.5 * std::tanh(lambda_slope * (p - 2.0 * n)) + 0.5 * std::tanh(lambda_slope * (p - 2.0 * (1.0 - n)));
}

double double_tanh_derivative(double p, double n, double lambda_slope) noexcept {
    const double a = std::tanh(lambda_slope * (p - 2.0 * n));
    const double b = std::tanh(lambda_slope * (p - 2.0 * (1.0 - n)));
    return 0.5 * lambda_slope * ((1.0 - b * b) - (1.0 - a * a));
}

ModificationMap double_tanh_relax(const ProbabilityMap& prob, const NoiseField& noise, double lambda_slope) {
    if (!(lambda_slope > 0.0) || !std::isfinite(lambda_slope)) throw std::invalid_argument("lambda_slope must be positive");
    require_same_shape(prob.map(), noise.values);
    ModificationMap out{RealMap(prob.width(), prob.height()), ModificationMode::Relaxed};
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = double_tanh_value(prob[i], noise.values[i], lambda_slope);
    }
    return out;
}

ModificationMap hard_sample(const ProbabilityMap& prob, const NoiseField& noise) {
    require_same_shape(prob.map(), noise.values);
    ModificationMap out{RealMap(prob.width(), prob.height()), ModificationMode::Hard};
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double half = 0.5 * prob[i];
        const double n = noise.values[i];
        if (n < half) {
            out.values[i] = -1.0;
        } else if (n > 1.0 - half) {
            out.values[i] = 1.0;
        }
    }
    return out;
}

Image apply_modifications(const Image& cover, const ModificationMap& mods) {
    if (mods.mode != ModificationMode::Hard) throw std::invalid_argument("hard modification map required");
    if (mods.values.width() != cover.width() || mods.values.height() != cover.height()) {
        throw std::invalid_argument("dimension mismatch");
    }
    Image stego = cover;
    auto px = stego.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        const double m = mods.values[i];
        if (m == 0.0) continue;
        if (m != 1.0 && m != -1.0) throw std::invalid_argument("hard modification map required");
        int v = px[i] + static_cast<int>(m);
        if (v < 0) v = 1;
        if (v > 255) v = 254;
        px[i] = static_cast<std::uint8_t>(v);
    }
    return stego;
}

double payload_bits(const ProbabilityMap& prob) {
    double bits = 0.0;
    for (double p : prob.map().values()) bits += ternary_entropy(p);
    return bits;
}

double probability_for_payload(double q) {
    if (!(q > 0.0 && q <= kMaxPayload)) throw std::invalid_argument("payload out of range");
    if (q >= ternary_entropy(kMaxChangeProbability)) return kMaxChangeProbability;
    double lo = 0.0;
    double hi = kMaxChangeProbability;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (ternary_entropy(mid) < q) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double hlo = ternary_entropy(lo);
    const double hhi = ternary_entropy(hi);
    return (q - hlo <= hhi - q) ? lo : hi;
}

}  // namespace resguide
