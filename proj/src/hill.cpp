#include "resguide/hill.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace resguide {
namespace {

constexpr double kHillEps = 1e-10;
constexpr std::size_t kMaxBisection = 200;

double change_probability(double rho, double lambda) {
    const double e = std::exp(-lambda * rho);
    return 2.0 * e / (1.0 + 2.0 * e);
}

void fill_probabilities(const CostMap& costs, double lambda, RealMap& out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double rho = costs.rho[i];
        out[i] = rho >= costs.wet ? 0.0 : std::min(change_probability(rho, lambda), kMaxChangeProbability);
    }
}

double total_bits(const RealMap& p) {
    double bits = 0.0;
    for (double v : p.values()) bits += ternary_entropy(v);
    return bits;
}

}  // namespace

CostMap hill_cost(const Image& cover, const KernelBank& bank) {
    RealMap residual = convolve(image_to_realmap(cover), bank.kb3());
    for (double& v : residual.values()) v = std::abs(v);
    RealMap spread = convolve(residual, bank.mean3());
    for (double& v : spread.values()) v = 1.0 / (v + kHillEps);
    CostMap costs{convolve(spread, bank.mean15), kWetCost};
    for (double& v : costs.rho.values()) v = std::min(v, costs.wet);
    return costs;
}

GibbsSolution solve_payload(const CostMap& costs, double q) {
    require_payload(q);
    for (double v : costs.rho.values()) {
        if (!(v > 0.0) || std::isnan(v)) throw std::invalid_argument("costs must be positive");
    }
    const double target = q * static_cast<double>(costs.rho.size());
    RealMap p(costs.rho.width(), costs.rho.height());

    fill_probabilities(costs, 0.0, p);
    if (total_bits(p) < target) throw std::invalid_argument("payload unreachable");

    // Payload decreases monotonically in lambda; bracket then bisect to full
    // precision so that rescaled costs give the same map.
    double lo = 0.0;
    double hi = 1.0;
    std::size_t iterations = 0;
    for (;;) {
        fill_probabilities(costs, hi, p);
        ++iterations;
        if (total_bits(p) <= target || iterations >= kMaxBisection) break;
        lo = hi;
        hi *= 2.0;
    }
    while (iterations < kMaxBisection) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        fill_probabilities(costs, mid, p);
        ++iterations;
        if (total_bits(p) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    fill_probabilities(costs, hi, p);
    double bits = total_bits(p);
    double lambda = hi;
    RealMap p_lo(p.width(), p.height());
    fill_probabilities(costs, lo, p_lo);
    const double bits_lo = total_bits(p_lo);
    if (std::abs(bits_lo - target) < std::abs(bits - target)) {
        p = std::move(p_lo);
        bits = bits_lo;
        lambda = lo;
    }
    if (std::abs(bits - target) >= 0.1) throw std::runtime_error("payload bisection did not converge");
    return GibbsSolution{ProbabilityMap(std::move(p)), lambda, bits, iterations};
}

ProbabilityMap costs_to_probabilities(const CostMap& costs, double q) { return solve_payload(costs, q).probabilities; }

}  // namespace resguide
