#include "resguide/guidance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace resguide {

void GuidanceConfig::validate() const {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("r must lie in (0, 1)");
    if (!(eps_recip > 0.0) || !std::isfinite(eps_recip)) throw std::invalid_argument("eps_recip must be positive");
    if (!(eps_log > 0.0) || !std::isfinite(eps_log)) throw std::invalid_argument("eps_log must be positive");
}

void LossWeights::validate() const {
    for (double w : {alpha, beta, gamma, delta}) {
        if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("loss weights must be finite and non-negative");
    }
}

std::string ComponentSet::to_string() const {
    if (bits_ == 0) return "none";
    std::string s;
    auto add = [&s](const char* name) {
        if (!s.empty()) s += '+';
        s += name;
    };
    if (contains(Component::RG)) add("RG");
    if (contains(Component::RDG)) add("RDG");
    if (contains(Component::LVG)) add("LVG");
    return s;
}

ComponentSet ComponentSet::parse(std::string_view text) {
    ComponentSet out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find_first_of(",+", pos);
        if (end == std::string_view::npos) end = text.size();
        std::string token;
        for (char ch : text.substr(pos, end - pos)) {
            if (!std::isspace(static_cast<unsigned char>(ch))) token += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
        if (token == "rg") {
            out = out.with(Component::RG);
        } else if (token == "rdg") {
            out = out.with(Component::RDG);
        } else if (token == "lvg") {
            out = out.with(Component::LVG);
        } else if (!token.empty() && token != "none") {
            throw std::invalid_argument("unknown guidance component '" + token + "'");
        }
        pos = end + 1;
    }
    return out;
}

std::array<ComponentSet, 8> ComponentSet::all_subsets() {
    std::array<ComponentSet, 8> out;
    for (unsigned b = 0; b < 8; ++b) out[b] = ComponentSet(b);
    return out;
}

std::array<ComponentSet, 7> ComponentSet::nonempty_subsets() {
    constexpr auto RG = static_cast<unsigned>(Component::RG);
    constexpr auto RDG = static_cast<unsigned>(Component::RDG);
    constexpr auto LVG = static_cast<unsigned>(Component::LVG);
    return {ComponentSet(RDG),       ComponentSet(LVG),      ComponentSet(RG),
            ComponentSet(RDG | LVG), ComponentSet(RG | RDG), ComponentSet(RG | LVG),
            ComponentSet(RG | RDG | LVG)};
}

std::string loss_csv_header() { return "step,l1,l2,l3,l4,total,active"; }

std::string loss_csv_row(std::size_t step, const LossBreakdown& b) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,", step, b.l1, b.l2, b.l3, b.l4, b.total);
    return buf + b.active.to_string();
}

std::vector<RealMap> smoothed_residual_maps(const RealMap& cover, const KernelBank& bank) {
    std::vector<RealMap> out;
    out.reserve(bank.h1.size());
    for (const Kernel& k : bank.h1) {
        RealMap res = convolve(cover, k);
        for (double& v : res.values()) v = std::abs(v);
        const double peak = res.max();
        if (peak > 0.0) {
            for (double& v : res.values()) v /= peak;
        } else {
            std::fill(res.values().begin(), res.values().end(), 0.0);
        }
        out.push_back(convolve(res, bank.mean3()));
    }
    return out;
}

RealMap residual_reciprocal_map(const RealMap& cover, const KernelBank& bank, const GuidanceConfig& cfg) {
    cfg.validate();
    RealMap out(cover.width(), cover.height());
    for (const RealMap& smoothed : smoothed_residual_maps(cover, bank)) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += 1.0 / (smoothed[i] + cfg.eps_recip);
    }
    return out;
}

RealMap diffused_modification_map(const RealMap& mod_map, const KernelBank& bank) {
    RealMap magnitude(mod_map.width(), mod_map.height());
    for (std::size_t i = 0; i < mod_map.size(); ++i) {
        const double v = mod_map[i];
        if (!(v >= -1.0 && v <= 1.0)) throw std::invalid_argument("invalid modification magnitude");
        magnitude[i] = std::abs(v);
    }
    const RealMap large = convolve(magnitude, bank.l2[0]);
    const RealMap small = convolve(magnitude, bank.l2[1]);
    RealMap out(mod_map.width(), mod_map.height());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (large[i] + small[i]);
    return out;
}

double loss_residual_guidance(const RealMap& diffused, const RealMap& reciprocal) {
    require_same_shape(diffused, reciprocal);
    double s = 0.0;
    for (std::size_t i = 0; i < diffused.size(); ++i) s += std::abs(diffused[i] * reciprocal[i]);
    return s / static_cast<double>(diffused.size());
}

RealMap residual_distance_map(const RealMap& cover, const RealMap& stego, const KernelBank& bank) {
    require_same_shape(cover, stego);
    RealMap acc(cover.width(), cover.height());
    for (const Kernel& k : bank.h2) {
        const RealMap rx = convolve(cover, k);
        const RealMap ry = convolve(stego, k);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::abs(rx[i] - ry[i]);
    }
    const double n = static_cast<double>(bank.h2.size());
    for (double& v : acc.values()) v /= n;
    return acc;
}

double loss_residual_distance(const RealMap& cover, const RealMap& stego, const RealMap& prob, const KernelBank& bank) {
    require_same_shape(cover, stego);
    require_same_shape(cover, prob);
    require_probability_map(prob);
    const RealMap dist = residual_distance_map(cover, stego, bank);
    double s = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) s += std::abs(dist[i] * prob[i]);
    return s / static_cast<double>(dist.size());
}

RealMap local_variance_map(const RealMap& cover) {
    const auto w = static_cast<std::ptrdiff_t>(cover.width());
    const auto h = static_cast<std::ptrdiff_t>(cover.height());
    if (w < 2 || h < 2) throw std::invalid_argument("image too small");
    RealMap out(cover.width(), cover.height());
    std::array<double, 9> window{};
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            std::size_t n = 0;
            for (std::ptrdiff_t dy = -1; dy <= 1; ++dy) {
                for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
                    window[n++] = cover(static_cast<std::size_t>(mirror_index(y + dy, h)),
                                        static_cast<std::size_t>(mirror_index(x + dx, w)));
                }
            }
            // 81 * variance = 9 * sum(v^2) - sum(v)^2 is exact for 8-bit data, so
            // equal variances compare equal and mask ties follow raster order.
            double sum = 0.0;
            double sum_sq = 0.0;
            for (double v : window) {
                sum += v;
                sum_sq += v * v;
            }
            const double var = std::max(0.0, 9.0 * sum_sq - sum * sum);
            out(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = var / 81.0;
        }
    }
    return out;
}

RealMap smooth_mask(const RealMap& variance, double r) {
    if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("r must lie in (0, 1)");
    const std::size_t n = variance.size();
    const auto ones = static_cast<std::size_t>(std::floor(r * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&variance](std::size_t a, std::size_t b) { return variance[a] < variance[b]; });
    RealMap mask(variance.width(), variance.height());
    for (std::size_t i = 0; i < ones; ++i) mask[order[i]] = 1.0;
    return mask;
}

double loss_local_variance(const RealMap& mask, const RealMap& prob) {
    require_same_shape(mask, prob);
    double s = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) s += std::abs(mask[i] * prob[i]);
    return s / static_cast<double>(mask.size());
}

double ternary_entropy(double p, double eps_log) noexcept {
    const double half = 0.5 * p;
    const double stay = 1.0 - p;
    return -2.0 * half * std::log2(std::max(half, eps_log)) - stay * std::log2(std::max(stay, eps_log));
}

double ternary_entropy_derivative(double p, double eps_log) noexcept {
    constexpr double inv_ln2 = 1.0 / std::numbers::ln2;
    const double half = 0.5 * p;
    const double stay = 1.0 - p;
    const double d_change = -(std::log2(std::max(half, eps_log)) + (half >= eps_log ? inv_ln2 : 0.0));
    const double d_stay = std::log2(std::max(stay, eps_log)) + (stay >= eps_log ? inv_ln2 : 0.0);
    return d_change + d_stay;
}

double loss_payload(const RealMap& prob, double q, const GuidanceConfig& cfg) {
    require_payload(q);
    require_probability_map(prob);
    double bits = 0.0;
    for (double p : prob.values()) bits += ternary_entropy(p, cfg.eps_log);
    const double gap = bits - static_cast<double>(prob.size()) * q;
    return gap * gap;
}

LossBreakdown loss_total(const LossComponents& c, const LossWeights& weights, ComponentSet active) {
    LossBreakdown b{c.l1, c.l2, c.l3, c.l4, 0.0, active};
    double total = 0.0;
    if (active.contains(Component::RG)) total += weights.alpha * c.l1;
    if (active.contains(Component::RDG)) total += weights.beta * c.l2;
    if (active.contains(Component::LVG)) total += weights.gamma * c.l3;
    total += weights.delta * c.l4;
    b.total = total;
    return b;
}

void require_probability_map(const RealMap& prob) {
    for (double p : prob.values()) {
        if (!(p >= 0.0 && p <= kMaxChangeProbability)) throw std::invalid_argument("probability out of range");
    }
}

void require_payload(double q) {
    if (!(q > 0.0 && q < kMaxPayload)) throw std::invalid_argument("payload out of range");
}

}  // namespace resguide
