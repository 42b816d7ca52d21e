#pragma once

#include "resguide/embedding.hpp"
#include "resguide/image.hpp"
#include "resguide/kernels.hpp"

namespace resguide {

inline constexpr double kWetCost = 1e10;

/// Per-pixel embedding costs; values at or above `wet` are never modified.
struct CostMap {
    RealMap rho;
    double wet = kWetCost;
};

/// HILL: rho = MEAN15(1 / (MEAN3(|KB3 * X|) + 1e-10)), capped at the wet cost.
CostMap hill_cost(const Image& cover, const KernelBank& bank = default_kernel_bank());

struct GibbsSolution {
    ProbabilityMap probabilities;
    double lambda = 0.0;
    double payload_bits = 0.0;
    std::size_t iterations = 0;
};

/// Converts costs to ternary change probabilities
///   p(+1) = p(-1) = exp(-lambda rho) / (1 + 2 exp(-lambda rho)),
/// with lambda chosen by bisection so the total entropy equals q * h * w.
/// Throws std::invalid_argument("payload unreachable") when the non-wet
/// pixels cannot carry the requested payload.
GibbsSolution solve_payload(const CostMap& costs, double q);

ProbabilityMap costs_to_probabilities(const CostMap& costs, double q);

}  // namespace resguide
