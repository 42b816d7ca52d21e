#include "resguide/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace resguide {
namespace {

double sign_of(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double logit(double s) { return std::log(s) - std::log1p(-s); }

struct Forward {
    std::vector<double> prob;
    std::vector<double> dprob;  // dP/dtheta
    std::vector<double> mod;    // relaxed modification
    std::vector<double> dmod;   // dM/dP
};

Forward forward_maps(const LogitField& theta, const NoiseField& noise, double lambda) {
    const std::size_t n = theta.theta.size();
    Forward f{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double s = logistic(theta.theta[i]);
        const double p = kMaxChangeProbability * s;
        f.prob[i] = p;
        f.dprob[i] = kMaxChangeProbability * s * (1.0 - s);
        const double nv = noise.values[i];
        const double a = std::tanh(lambda * (p - 2.0 * nv));
        const double b = std::tanh(lambda * (p - 2.0 * (1.0 - nv)));
        f.mod[i] = -0.5 * a + 0.5 * b;
        f.dmod[i] = 0.5 * lambda * ((1.0 - b * b) - (1.0 - a * a));
    }
    return f;
}

}  // namespace

double logistic(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

LogitField LogitField::uniform(std::size_t width, std::size_t height, double p) {
    if (!(p > 0.0 && p < kMaxChangeProbability)) throw std::invalid_argument("probability out of range");
    return LogitField{RealMap(width, height, logit(p / kMaxChangeProbability))};
}

ProbabilityMap LogitField::probabilities() const {
    RealMap p(theta.width(), theta.height());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = kMaxChangeProbability * logistic(theta[i]);
    return ProbabilityMap(std::move(p));
}

void OptimizerConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("steps must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("moment decay factors must lie in (0, 1)");
    }
    if (!(moment_eps > 0.0)) throw std::invalid_argument("moment epsilon must be positive");
    if (!(lambda_slope > 0.0) || !std::isfinite(lambda_slope)) throw std::invalid_argument("lambda_slope must be positive");
    weights.validate();
    guidance.validate();
}

GuidanceObjective::GuidanceObjective(const Image& cover, double q, const OptimizerConfig& cfg, const KernelBank& bank)
    : cover_(image_to_realmap(cover)), q_(q), cfg_(cfg), bank_(&bank) {
    require_payload(q);
    cfg_.validate();
    reciprocal_ = residual_reciprocal_map(cover_, bank, cfg_.guidance);
    // sum(M_L * R_HL) = sum(|M| * W) with W = 0.5 (C11^T + C7^T) R_HL.
    const RealMap large = convolve_adjoint(reciprocal_, bank.l2[0]);
    const RealMap small = convolve_adjoint(reciprocal_, bank.l2[1]);
    diffused_weight_ = RealMap(cover_.width(), cover_.height());
    for (std::size_t i = 0; i < diffused_weight_.size(); ++i) diffused_weight_[i] = 0.5 * (large[i] + small[i]);
    mask_ = smooth_mask(local_variance_map(cover_), cfg_.guidance.r);
}

GuidanceObjective::Evaluation GuidanceObjective::evaluate(const LogitField& theta, const NoiseField& noise,
                                                          bool with_gradient) const {
    require_same_shape(theta.theta, cover_);
    require_same_shape(noise.values, cover_);
    const std::size_t n = cover_.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const LossWeights& wt = cfg_.weights;
    const ComponentSet active = cfg_.active;
    const Forward f = forward_maps(theta, noise, cfg_.lambda_slope);

    std::vector<double> grad_prob(with_gradient ? n : 0, 0.0);
    std::vector<double> grad_mod(with_gradient ? n : 0, 0.0);

    // Residual guidance.
    double l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double magnitude = cfg_.expected_modification ? f.prob[i] : std::abs(f.mod[i]);
        l1 += magnitude * diffused_weight_[i];
    }
    l1 *= inv_n;
    if (with_gradient && active.contains(Component::RG)) {
        const double scale = wt.alpha * inv_n;
        for (std::size_t i = 0; i < n; ++i) {
            if (cfg_.expected_modification) {
                grad_prob[i] += scale * diffused_weight_[i];
            } else {
                grad_mod[i] += scale * diffused_weight_[i] * sign_of(f.mod[i]);
            }
        }
    }

    // Residual-distance guidance. R^Y_k - R^X_k = K_k (Y - X) = K_k M~.
    RealMap mod_map(cover_.width(), cover_.height(), f.mod);
    RealMap distance(cover_.width(), cover_.height());
    std::vector<RealMap> residual_gaps;
    const bool rdg_grad = with_gradient && active.contains(Component::RDG);
    if (rdg_grad) residual_gaps.reserve(bank_->h2.size());
    for (const Kernel& k : bank_->h2) {
        RealMap gap = convolve(mod_map, k);
        for (std::size_t i = 0; i < n; ++i) distance[i] += std::abs(gap[i]);
        if (rdg_grad) residual_gaps.push_back(std::move(gap));
    }
    const double inv_k = 1.0 / static_cast<double>(bank_->h2.size());
    double l2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        distance[i] *= inv_k;
        l2 += distance[i] * f.prob[i];
    }
    l2 *= inv_n;
    if (rdg_grad) {
        const double scale = wt.beta * inv_n;
        for (std::size_t i = 0; i < n; ++i) grad_prob[i] += scale * distance[i];
        for (std::size_t k = 0; k < residual_gaps.size(); ++k) {
            RealMap& g = residual_gaps[k];
            for (std::size_t i = 0; i < n; ++i) g[i] = sign_of(g[i]) * f.prob[i] * scale * inv_k;
            const RealMap back = convolve_adjoint(g, bank_->h2[k]);
            for (std::size_t i = 0; i < n; ++i) grad_mod[i] += back[i];
        }
    }

    // Local-variance guidance.
    double l3 = 0.0;
    for (std::size_t i = 0; i < n; ++i) l3 += mask_[i] * f.prob[i];
    l3 *= inv_n;
    if (with_gradient && active.contains(Component::LVG)) {
        const double scale = wt.gamma * inv_n;
        for (std::size_t i = 0; i < n; ++i) grad_prob[i] += scale * mask_[i];
    }

    // Payload constraint.
    double bits = 0.0;
    for (std::size_t i = 0; i < n; ++i) bits += ternary_entropy(f.prob[i], cfg_.guidance.eps_log);
    const double gap = bits - static_cast<double>(n) * q_;
    const double l4 = gap * gap;
    if (with_gradient) {
        const double scale = wt.delta * 2.0 * gap;
        for (std::size_t i = 0; i < n; ++i) grad_prob[i] += scale * ternary_entropy_derivative(f.prob[i], cfg_.guidance.eps_log);
    }

    Evaluation out{loss_total({l1, l2, l3, l4}, wt, active), RealMap()};
    if (with_gradient) {
        out.gradient = RealMap(cover_.width(), cover_.height());
        for (std::size_t i = 0; i < n; ++i) {
            out.gradient[i] = (grad_prob[i] + grad_mod[i] * f.dmod[i]) * f.dprob[i];
        }
    }
    return out;
}

std::vector<bool> GuidanceObjective::kink_exclusions(const LogitField& theta, const NoiseField& noise, double h,
                                                     double zone) const {
    const std::size_t w = cover_.width();
    const std::size_t ht = cover_.height();
    const std::size_t n = cover_.size();
    const Forward f = forward_maps(theta, noise, cfg_.lambda_slope);
    std::vector<bool> excluded(n, false);
    // Generous bound on how far an argument moves under a +-h step.
    auto near_kink = [&](double arg, double slope) { return std::abs(arg) < zone + 4.0 * h * std::abs(slope); };

    if (cfg_.active.contains(Component::RG) && !cfg_.expected_modification) {
        for (std::size_t i = 0; i < n; ++i) {
            if (near_kink(f.mod[i], f.dmod[i] * f.dprob[i])) excluded[i] = true;
        }
    }
    if (!cfg_.active.contains(Component::RDG)) return excluded;

    const RealMap mod_map(w, ht, f.mod);
    std::vector<RealMap> gaps;
    for (const Kernel& k : bank_->h2) gaps.push_back(convolve(mod_map, k));

    const auto sw = static_cast<std::ptrdiff_t>(w);
    const auto sh = static_cast<std::ptrdiff_t>(ht);
    for (std::size_t idx = 0; idx < n; ++idx) {
        if (excluded[idx]) continue;
        const auto iy = static_cast<std::ptrdiff_t>(idx / w);
        const auto ix = static_cast<std::ptrdiff_t>(idx % w);
        const double chain = f.dmod[idx] * f.dprob[idx];
        for (std::size_t k = 0; k < bank_->h2.size() && !excluded[idx]; ++k) {
            const Kernel& ker = bank_->h2[k];
            const auto r = static_cast<std::ptrdiff_t>(ker.radius());
            for (std::ptrdiff_t py = std::max<std::ptrdiff_t>(0, iy - 2 * r); py <= std::min(sh - 1, iy + 2 * r); ++py) {
                for (std::ptrdiff_t px = std::max<std::ptrdiff_t>(0, ix - 2 * r); px <= std::min(sw - 1, ix + 2 * r); ++px) {
                    double weight = 0.0;
                    for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
                        if (mirror_index(py + dy, sh) != iy) continue;
                        for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
                            if (mirror_index(px + dx, sw) != ix) continue;
                            weight += ker.at(static_cast<std::size_t>(dy + r), static_cast<std::size_t>(dx + r));
                        }
                    }
                    if (weight == 0.0) continue;
                    const double arg = gaps[k](static_cast<std::size_t>(py), static_cast<std::size_t>(px));
                    if (near_kink(arg, weight * chain)) excluded[idx] = true;
                }
            }
        }
    }
    return excluded;
}

std::pair<LossBreakdown, RealMap> loss_and_gradient(const Image& cover, const LogitField& theta,
                                                    const OptimizerConfig& cfg, const NoiseField& noise, double q) {
    const GuidanceObjective objective(cover, q, cfg);
    auto eval = objective.evaluate(theta, noise, true);
    if (!std::isfinite(eval.loss.total)) throw std::runtime_error("non-finite loss");
    return {eval.loss, std::move(eval.gradient)};
}

OptimizationResult optimize(const Image& cover, double q, const OptimizerConfig& cfg, const KernelBank& bank) {
    require_payload(q);
    const GuidanceObjective objective(cover, q, cfg, bank);
    const std::size_t w = cover.width();
    const std::size_t h = cover.height();
    const std::size_t n = cover.size();

    LogitField theta = LogitField::uniform(w, h, probability_for_payload(q));
    std::vector<double> m(n, 0.0);
    std::vector<double> v(n, 0.0);
    std::vector<LossBreakdown> trace;
    trace.reserve(cfg.steps);

    NoiseField noise;
    if (!cfg.resample_noise) noise = make_noise(w, h, cfg.seed, 1);
    double b1_pow = 1.0;
    double b2_pow = 1.0;
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        if (cfg.resample_noise) noise = make_noise(w, h, cfg.seed, step);
        const auto eval = objective.evaluate(theta, noise, true);
        trace.push_back(eval.loss);
        if (!std::isfinite(eval.loss.total) || !eval.gradient.all_finite()) {
            char msg[160];
            std::snprintf(msg, sizeof msg, "optimizer diverged at step %zu (l1=%g l2=%g l3=%g l4=%g)", step,
                          eval.loss.l1, eval.loss.l2, eval.loss.l3, eval.loss.l4);
            throw OptimizationDiverged(msg, std::move(trace));
        }
        b1_pow *= cfg.beta1;
        b2_pow *= cfg.beta2;
        const double c1 = 1.0 - b1_pow;
        const double c2 = 1.0 - b2_pow;
        const double lr = step <= cfg.warmup_steps
                              ? cfg.learning_rate * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps)
                              : cfg.learning_rate;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = eval.gradient[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            theta.theta[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.moment_eps);
        }
    }

    OptimizationResult result;
    result.probabilities = theta.probabilities();
    result.loss_trace = std::move(trace);
    result.modifications = hard_sample(result.probabilities, make_noise(w, h, cfg.seed, kFinalSampleStream));
    result.stego = apply_modifications(cover, result.modifications);
    const double bpp = payload_bits(result.probabilities) / static_cast<double>(n);
    result.converged = std::abs(bpp - q) < 0.01;
    return result;
}

double gradient_relative_error(double analytic, double numeric) noexcept {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / scale;
}

GradcheckReport gradcheck(const Image& cover, const OptimizerConfig& cfg, const GradcheckOptions& opts) {
    if (opts.trials < 1) throw std::invalid_argument("trials must be at least 1");
    const GuidanceObjective objective(cover, opts.q, cfg);
    const std::size_t w = cover.width();
    const std::size_t h = cover.height();
    const std::size_t n = cover.size();

    GradcheckReport report;
    report.tolerance = opts.tolerance;
    for (std::size_t t = 0; t < opts.trials; ++t) {
        // Per-trial streams above any optimizer step index.
        const std::uint64_t stream = (std::uint64_t{1} << 62) + 3 * t;
        LogitField theta{RealMap(w, h)};
        for (std::size_t i = 0; i < n; ++i) theta.theta[i] = -4.0 + 6.0 * keyed_uniform(cfg.seed, stream, i);
        const NoiseField noise = make_noise(w, h, cfg.seed, stream + 1);

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<double> keys(n);
        for (std::size_t i = 0; i < n; ++i) keys[i] = keyed_uniform(cfg.seed, stream + 2, i);
        std::stable_sort(order.begin(), order.end(), [&keys](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

        const auto analytic = objective.evaluate(theta, noise, true).gradient;
        const auto excluded = objective.kink_exclusions(theta, noise, opts.step);

        GradcheckTrial trial;
        for (std::size_t idx : order) {
            if (trial.checked >= opts.coordinates) break;
            if (excluded[idx]) {
                ++trial.excluded;
                continue;
            }
            LogitField probe = theta;
            probe.theta[idx] = theta.theta[idx] + opts.step;
            const double up = objective.evaluate(probe, noise, false).loss.total;
            probe.theta[idx] = theta.theta[idx] - opts.step;
            const double down = objective.evaluate(probe, noise, false).loss.total;
            const double numeric = (up - down) / (2.0 * opts.step);
            trial.max_relative_error = std::max(trial.max_relative_error, gradient_relative_error(analytic[idx], numeric));
            ++trial.checked;
        }
        report.max_relative_error = std::max(report.max_relative_error, trial.max_relative_error);
        report.trials.push_back(trial);
    }
    report.passed = report.max_relative_error < opts.tolerance;
    return report;
}

}  // namespace resguide
