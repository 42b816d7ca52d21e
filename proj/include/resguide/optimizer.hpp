#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "resguide/embedding.hpp"
#include "resguide/guidance.hpp"
#include "resguide/image.hpp"
#include "resguide/kernels.hpp"

namespace resguide {

/// Unconstrained parameterization of the probability map,
/// P = (2/3) * sigmoid(theta).
struct LogitField {
    RealMap theta;

    static LogitField uniform(std::size_t width, std::size_t height, double p);
    ProbabilityMap probabilities() const;
};

double logistic(double x) noexcept;

struct OptimizerConfig {
    std::size_t steps = 400;
    double learning_rate = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double moment_eps = 1e-8;
    // Learning rate ramps linearly from lr/warmup_steps to lr.
    std::size_t warmup_steps = 50;
    std::uint64_t seed = 0;
    bool resample_noise = true;
    // Debug mode: the residual-guidance path uses P in place of |M~|.
    bool expected_modification = false;
    double lambda_slope = 60.0;
    LossWeights weights;
    GuidanceConfig guidance;
    ComponentSet active = ComponentSet::all();

    void validate() const;
};

/// Cover-side constants of the objective (reciprocal residual weights, smooth
/// mask) together with the configuration. Evaluating the objective for a
/// logit field is then a pure function of (theta, noise).
class GuidanceObjective {
public:
    GuidanceObjective(const Image& cover, double q, const OptimizerConfig& cfg,
                      const KernelBank& bank = default_kernel_bank());

    struct Evaluation {
        LossBreakdown loss;
        RealMap gradient;  // d total / d theta; empty unless requested
    };

    Evaluation evaluate(const LogitField& theta, const NoiseField& noise, bool with_gradient = true) const;

    /// Coordinates whose central difference with step h would cross a kink of
    /// an absolute value used in the active loss terms.
    std::vector<bool> kink_exclusions(const LogitField& theta, const NoiseField& noise, double h,
                                      double zone = 0.0) const;

    const RealMap& reciprocal() const noexcept { return reciprocal_; }
    const RealMap& mask() const noexcept { return mask_; }
    std::size_t width() const noexcept { return cover_.width(); }
    std::size_t height() const noexcept { return cover_.height(); }
    double payload() const noexcept { return q_; }
    const OptimizerConfig& config() const noexcept { return cfg_; }

private:
    RealMap cover_;
    double q_;
    OptimizerConfig cfg_;
    const KernelBank* bank_;
    RealMap reciprocal_;       // R_HL
    RealMap diffused_weight_;  // adjoint of the L2 diffusion applied to R_HL
    RealMap mask_;             // F
};

/// Loss and d(total)/d(theta) for one noise realization.
std::pair<LossBreakdown, RealMap> loss_and_gradient(const Image& cover, const LogitField& theta,
                                                    const OptimizerConfig& cfg, const NoiseField& noise, double q);

struct OptimizationResult {
    ProbabilityMap probabilities;
    std::vector<LossBreakdown> loss_trace;
    ModificationMap modifications;
    Image stego;
    bool converged = false;
};

class OptimizationDiverged : public std::runtime_error {
public:
    OptimizationDiverged(const std::string& what, std::vector<LossBreakdown> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<LossBreakdown>& trace() const noexcept { return trace_; }

private:
    std::vector<LossBreakdown> trace_;
};

/// Noise stream reserved for the final hard sample; optimization steps use
/// streams 1..steps.
inline constexpr std::uint64_t kFinalSampleStream = 0;

/// Adam descent on the logit field, starting from the uniform map that meets
/// the payload exactly.
OptimizationResult optimize(const Image& cover, double q, const OptimizerConfig& cfg,
                            const KernelBank& bank = default_kernel_bank());

struct GradcheckTrial {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    std::size_t excluded = 0;
};

struct GradcheckReport {
    std::vector<GradcheckTrial> trials;
    double max_relative_error = 0.0;
    double tolerance = 1e-5;
    bool passed = false;
};

struct GradcheckOptions {
    std::size_t trials = 1;
    std::size_t coordinates = 100;
    double step = 1e-5;
    double tolerance = 1e-5;
    double q = 0.4;
};

/// Relative error used by the gradient check: |a - b| / max(|a|, |b|, 1e-6).
double gradient_relative_error(double analytic, double numeric) noexcept;

/// Compares analytic gradients against central differences at random
/// coordinates of random logit fields, skipping kink-crossing coordinates.
GradcheckReport gradcheck(const Image& cover, const OptimizerConfig& cfg, const GradcheckOptions& opts = {});

}  // namespace resguide
