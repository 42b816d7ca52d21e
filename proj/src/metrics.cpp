#include "resguide/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "resguide/optimizer.hpp"

namespace resguide {
namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j);
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

RealMap cover_mask(const Image& cover, const GuidanceConfig& cfg) {
    return smooth_mask(local_variance_map(image_to_realmap(cover)), cfg.r);
}

void require_matching(const Image& cover, const ProbabilityMap& prob) {
    if (prob.width() != cover.width() || prob.height() != cover.height()) throw std::invalid_argument("dimension mismatch");
}

}  // namespace

double residual_distance(const Image& cover, const Image& stego, const KernelBank& bank) {
    if (cover.width() != stego.width() || cover.height() != stego.height()) throw std::invalid_argument("dimension mismatch");
    const RealMap d = residual_distance_map(image_to_realmap(cover), image_to_realmap(stego), bank);
    return d.sum() / static_cast<double>(d.size());
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
    if (a.size() < 2) return 0.0;
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = 0.5 * (n - 1.0);
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

RealMap texture_map(const Image& cover, const KernelBank& bank) {
    const auto maps = smoothed_residual_maps(image_to_realmap(cover), bank);
    RealMap out(cover.width(), cover.height());
    for (const RealMap& m : maps) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += m[i];
    }
    const double inv = 1.0 / static_cast<double>(maps.size());
    for (double& v : out.values()) v *= inv;
    return out;
}

double texture_affinity(const Image& cover, const ProbabilityMap& prob, const GuidanceConfig& cfg, const KernelBank& bank) {
    require_matching(cover, prob);
    const RealMap mask = cover_mask(cover, cfg);
    const RealMap texture = texture_map(cover, bank);
    std::vector<double> p;
    std::vector<double> t;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] != 0.0) continue;
        p.push_back(prob[i]);
        t.push_back(texture[i]);
    }
    return spearman(p, t);
}

double mask_mass_ratio(const Image& cover, const ProbabilityMap& prob, const GuidanceConfig& cfg) {
    require_matching(cover, prob);
    const RealMap mask = cover_mask(cover, cfg);
    double on = 0.0;
    double off = 0.0;
    std::size_t n_on = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] != 0.0) {
            on += prob[i];
            ++n_on;
        } else {
            off += prob[i];
        }
    }
    const std::size_t n_off = mask.size() - n_on;
    const double mean_on = n_on ? on / static_cast<double>(n_on) : 0.0;
    const double mean_off = n_off ? off / static_cast<double>(n_off) : 0.0;
    if (mean_off == 0.0) return mean_on == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return mean_on / mean_off;
}

MetricsReport compute_metrics(const Image& cover, const Image& stego, const ProbabilityMap& prob,
                              const GuidanceConfig& cfg, const KernelBank& bank) {
    require_matching(cover, prob);
    if (cover.width() != stego.width() || cover.height() != stego.height()) throw std::invalid_argument("dimension mismatch");
    MetricsReport m;
    std::size_t changed = 0;
    for (std::size_t i = 0; i < cover.size(); ++i) changed += cover.pixels()[i] != stego.pixels()[i];
    const double n = static_cast<double>(cover.size());
    m.change_rate = static_cast<double>(changed) / n;
    m.payload_bpp = payload_bits(prob) / n;
    m.residual_distance = residual_distance(cover, stego, bank);
    m.prob_residual_rank_corr = texture_affinity(cover, prob, cfg, bank);
    m.mask_mass_ratio = mask_mass_ratio(cover, prob, cfg);
    return m;
}

std::vector<ComparisonRow> compare_methods(const Image& cover, const std::vector<NamedMap>& maps,
                                           std::span<const std::uint64_t> seeds, const GuidanceConfig& cfg,
                                           const KernelBank& bank) {
    std::vector<std::size_t> order(maps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&maps](std::size_t a, std::size_t b) { return maps[a].name < maps[b].name; });
    std::vector<std::uint64_t> sorted_seeds(seeds.begin(), seeds.end());
    std::sort(sorted_seeds.begin(), sorted_seeds.end());

    std::vector<ComparisonRow> rows;
    for (std::size_t mi : order) {
        const NamedMap& method = maps[mi];
        require_matching(cover, method.prob);
        // Cover-only quantities are shared by every seed.
        const double payload = payload_bits(method.prob) / static_cast<double>(cover.size());
        const double affinity = texture_affinity(cover, method.prob, cfg, bank);
        const double ratio = mask_mass_ratio(cover, method.prob, cfg);
        MetricsReport mean{};
        for (std::uint64_t seed : sorted_seeds) {
            const auto mods = hard_sample(method.prob, make_noise(cover.width(), cover.height(), seed, kFinalSampleStream));
            const Image stego = apply_modifications(cover, mods);
            MetricsReport m;
            std::size_t changed = 0;
            for (std::size_t i = 0; i < cover.size(); ++i) changed += cover.pixels()[i] != stego.pixels()[i];
            m.change_rate = static_cast<double>(changed) / static_cast<double>(cover.size());
            m.payload_bpp = payload;
            m.residual_distance = residual_distance(cover, stego, bank);
            m.prob_residual_rank_corr = affinity;
            m.mask_mass_ratio = ratio;
            rows.push_back({method.name, std::to_string(seed), m});
            mean.change_rate += m.change_rate;
            mean.residual_distance += m.residual_distance;
        }
        if (!sorted_seeds.empty()) {
            const double k = static_cast<double>(sorted_seeds.size());
            mean.change_rate /= k;
            mean.residual_distance /= k;
            mean.payload_bpp = payload;
            mean.prob_residual_rank_corr = affinity;
            mean.mask_mass_ratio = ratio;
            rows.push_back({method.name, "mean", mean});
        }
    }
    return rows;
}

std::string metrics_csv_header() {
    return "change_rate,payload_bpp,residual_distance,prob_residual_rank_corr,mask_mass_ratio";
}

std::string metrics_csv_row(const MetricsReport& m) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g", m.change_rate, m.payload_bpp, m.residual_distance,
                  m.prob_residual_rank_corr, m.mask_mass_ratio);
    return buf;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string out = "method,seed," + metrics_csv_header() + '\n';
    for (const auto& r : rows) out += r.method + ',' + r.seed + ',' + metrics_csv_row(r.metrics) + '\n';
    return out;
}

}  // namespace resguide
