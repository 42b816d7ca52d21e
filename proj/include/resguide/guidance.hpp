#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "resguide/image.hpp"
#include "resguide/kernels.hpp"

namespace resguide {

/// Largest per-pixel change probability; ternary entropy peaks here.
inline constexpr double kMaxChangeProbability = 2.0 / 3.0;

/// log2(3), the ternary entropy ceiling in bits per pixel.
inline constexpr double kMaxPayload = 1.5849625007211562;

struct GuidanceConfig {
    double r = 0.5;            // fraction of pixels marked smooth
    double eps_recip = 1e-2;   // stabilizer in the residual reciprocals
    double eps_log = 1e-12;    // floor inside entropy logarithms

    void validate() const;
};

struct LossWeights {
    double alpha = 1.0;
    double beta = 10.0;
    double gamma = 1000.0;
    double delta = 1e-4;

    void validate() const;
};

/// Guidance components that can be switched on or off. The payload term is
/// always active.
enum class Component : unsigned { RG = 1U, RDG = 2U, LVG = 4U };

class ComponentSet {
public:
    constexpr ComponentSet() = default;
    constexpr explicit ComponentSet(unsigned bits) : bits_(bits & 7U) {}

    static constexpr ComponentSet all() { return ComponentSet(7U); }
    static constexpr ComponentSet none() { return ComponentSet(0U); }

    constexpr bool contains(Component c) const { return (bits_ & static_cast<unsigned>(c)) != 0; }
    constexpr ComponentSet with(Component c) const { return ComponentSet(bits_ | static_cast<unsigned>(c)); }
    constexpr ComponentSet without(Component c) const { return ComponentSet(bits_ & ~static_cast<unsigned>(c)); }
    constexpr unsigned bits() const { return bits_; }
    constexpr bool operator==(const ComponentSet&) const = default;

    /// "RG+RDG+LVG", "RDG", ..., or "none" for the empty set.
    std::string to_string() const;

    /// Parses a comma-separated list such as "rg,lvg" (case-insensitive).
    /// An empty string or "none" yields the empty set.
    static ComponentSet parse(std::string_view text);

    /// All eight subsets, empty set first, full set last.
    static std::array<ComponentSet, 8> all_subsets();

    /// The seven non-empty subsets in the order RDG, LVG, RG, RDG+LVG,
    /// RG+RDG, RG+LVG, RG+RDG+LVG.
    static std::array<ComponentSet, 7> nonempty_subsets();

private:
    unsigned bits_ = 0;
};

struct LossComponents {
    double l1 = 0.0;  // residual guidance
    double l2 = 0.0;  // residual-distance guidance
    double l3 = 0.0;  // local-variance guidance
    double l4 = 0.0;  // payload constraint
};

struct LossBreakdown {
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;
    double l4 = 0.0;
    double total = 0.0;
    ComponentSet active = ComponentSet::all();
};

std::string loss_csv_header();
std::string loss_csv_row(std::size_t step, const LossBreakdown& b);

/// Normalized absolute high-pass residuals of the cover (one map per H1
/// filter), each divided by its own maximum and smoothed by MEAN3.
std::vector<RealMap> smoothed_residual_maps(const RealMap& cover, const KernelBank& bank);

/// Sum over the H1 filters of 1 / (smoothed normalized residual + eps_recip).
RealMap residual_reciprocal_map(const RealMap& cover, const KernelBank& bank, const GuidanceConfig& cfg);

/// Pixel-wise mean of MEAN11(|M|) and MEAN7(|M|).
RealMap diffused_modification_map(const RealMap& mod_map, const KernelBank& bank);

double loss_residual_guidance(const RealMap& diffused, const RealMap& reciprocal);

/// Mean over the 30 SRM kernels of |R^X_k - R^Y_k|, per pixel.
RealMap residual_distance_map(const RealMap& cover, const RealMap& stego, const KernelBank& bank);

double loss_residual_distance(const RealMap& cover, const RealMap& stego, const RealMap& prob, const KernelBank& bank);

/// Population variance of each mirror-padded 3x3 neighbourhood.
RealMap local_variance_map(const RealMap& cover);

/// Binary mask marking the floor(r*h*w) lowest-variance pixels; ties go to the
/// earlier pixel in raster order.
RealMap smooth_mask(const RealMap& variance, double r);

double loss_local_variance(const RealMap& mask, const RealMap& prob);

/// Ternary entropy in bits of (P/2, 1-P, P/2). Logarithm arguments are
/// floored at eps_log so that 0*log(0) evaluates to 0.
double ternary_entropy(double p, double eps_log = 1e-12) noexcept;
double ternary_entropy_derivative(double p, double eps_log = 1e-12) noexcept;

double loss_payload(const RealMap& prob, double q, const GuidanceConfig& cfg);

LossBreakdown loss_total(const LossComponents& components, const LossWeights& weights, ComponentSet active);

/// Throws std::invalid_argument("probability out of range") unless every
/// value lies in [0, 2/3].
void require_probability_map(const RealMap& prob);

/// Throws std::invalid_argument("payload out of range") unless 0 < q < log2(3).
void require_payload(double q);

}  // namespace resguide
