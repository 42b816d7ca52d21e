#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "resguide/embedding.hpp"
#include "resguide/guidance.hpp"
#include "resguide/image.hpp"
#include "resguide/kernels.hpp"

namespace resguide {

struct MetricsReport {
    double change_rate = 0.0;
    double payload_bpp = 0.0;
    double residual_distance = 0.0;
    double prob_residual_rank_corr = 0.0;
    double mask_mass_ratio = 0.0;
};

/// Mean over pixels of (1/30) sum_k |R^X_k - R^Y_k| for the SRM bank.
double residual_distance(const Image& cover, const Image& stego, const KernelBank& bank = default_kernel_bank());

/// Spearman rank correlation with average ranks for ties; 0 if either side is
/// constant.
double spearman(std::span<const double> a, std::span<const double> b);

/// Pixel-wise mean of the two smoothed normalized H1 residual maps.
RealMap texture_map(const Image& cover, const KernelBank& bank = default_kernel_bank());

/// Spearman correlation between P and the texture map over pixels outside the
/// smooth mask.
double texture_affinity(const Image& cover, const ProbabilityMap& prob, const GuidanceConfig& cfg = {},
                        const KernelBank& bank = default_kernel_bank());

/// mean(P on F) / mean(P off F); +inf when P vanishes off F but not on F.
double mask_mass_ratio(const Image& cover, const ProbabilityMap& prob, const GuidanceConfig& cfg = {});

MetricsReport compute_metrics(const Image& cover, const Image& stego, const ProbabilityMap& prob,
                              const GuidanceConfig& cfg = {}, const KernelBank& bank = default_kernel_bank());

struct NamedMap {
    std::string name;
    ProbabilityMap prob;
};

struct ComparisonRow {
    std::string method;
    std::string seed;  // decimal seed, or "mean" for the per-method summary
    MetricsReport metrics;
};

/// Hard-samples every map with every seed, embeds, and measures. Rows are
/// ordered by method name then seed, each method followed by its mean row.
std::vector<ComparisonRow> compare_methods(const Image& cover, const std::vector<NamedMap>& maps,
                                           std::span<const std::uint64_t> seeds, const GuidanceConfig& cfg = {},
                                           const KernelBank& bank = default_kernel_bank());

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& m);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

}  // namespace resguide
