#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "resguide/embedding.hpp"
#include "resguide/guidance.hpp"

using namespace resguide;

namespace {

const KernelBank& bank() { return default_kernel_bank(); }

double max_abs_diff(const RealMap& a, const RealMap& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double mean_region(const RealMap& m, std::size_t y0, std::size_t x0, std::size_t n) {
    double s = 0.0;
    for (std::size_t y = y0; y < y0 + n; ++y)
        for (std::size_t x = x0; x < x0 + n; ++x) s += m(y, x);
    return s / static_cast<double>(n * n);
}

}  // namespace

TEST_CASE("residual reciprocal map") {
    const GuidanceConfig cfg;
    SUBCASE("constant cover") {
        const RealMap r = residual_reciprocal_map(RealMap(16, 16, 90.0), bank(), cfg);
        for (double v : r.values()) CHECK(v == doctest::Approx(2.0 / cfg.eps_recip));
    }
    SUBCASE("matches the direct pipeline") {
        for (unsigned t = 0; t < 5; ++t) {
            const RealMap cover = oracle::random_map(16, 16, 100 + t, 0.0, 255.0);
            CHECK(max_abs_diff(residual_reciprocal_map(cover, bank(), cfg), oracle::reciprocal(cover, cfg.eps_recip)) < 1e-9);
        }
    }
    SUBCASE("textured quadrant has the smaller penalty") {
        RealMap cover(32, 32, 128.0);
        const RealMap noise = oracle::random_map(16, 16, 3, -60.0, 60.0);
        for (std::size_t y = 0; y < 16; ++y)
            for (std::size_t x = 0; x < 16; ++x) cover(y, x) += noise(y, x);
        const RealMap r = residual_reciprocal_map(cover, bank(), cfg);
        CHECK(mean_region(r, 0, 0, 16) < mean_region(r, 16, 16, 16));
    }
    SUBCASE("invariant to intensity scaling") {
        const RealMap cover = oracle::random_map(24, 24, 8, 0.0, 120.0);
        RealMap doubled = cover;
        for (double& v : doubled.values()) v *= 2.0;
        CHECK(max_abs_diff(residual_reciprocal_map(cover, bank(), cfg), residual_reciprocal_map(doubled, bank(), cfg)) < 1e-9);
    }
}

TEST_CASE("diffused modification map") {
    CHECK(max_abs_diff(diffused_modification_map(RealMap(16, 16, 0.0), bank()), RealMap(16, 16, 0.0)) == 0.0);
    CHECK(max_abs_diff(diffused_modification_map(RealMap(16, 16, -1.0), bank()), RealMap(16, 16, 1.0)) < 1e-12);
    RealMap spike(32, 32, 0.0);
    spike(16, 16) = 1.0;
    CHECK(diffused_modification_map(spike, bank())(16, 16) == doctest::Approx((1.0 / 121 + 1.0 / 49) / 2.0));
    const RealMap mod = oracle::random_map(16, 16, 4, -1.0, 1.0);
    CHECK(max_abs_diff(diffused_modification_map(mod, bank()), oracle::diffused(mod)) < 1e-12);
    RealMap bad(16, 16, 0.0);
    bad[5] = 1.5;
    CHECK_THROWS_WITH_AS(diffused_modification_map(bad, bank()), "invalid modification magnitude", std::invalid_argument);
}

TEST_CASE("residual guidance loss") {
    CHECK(loss_residual_guidance(RealMap(16, 16, 0.0), RealMap(16, 16, 3.0)) == 0.0);
    CHECK(loss_residual_guidance(RealMap(16, 16, 1.0), RealMap(16, 16, 3.5)) == doctest::Approx(3.5));
    const RealMap ml = oracle::random_map(16, 16, 5, 0.0, 1.0);
    const RealMap rhl = oracle::random_map(16, 16, 6, 1.0, 200.0);
    CHECK(std::fabs(loss_residual_guidance(ml, rhl) - oracle::l1(ml, rhl)) < 1e-9);
    CHECK_THROWS_WITH_AS(loss_residual_guidance(RealMap(16, 16), RealMap(16, 15)), "dimension mismatch",
                         std::invalid_argument);
}

TEST_CASE("residual distance loss") {
    const RealMap cover = oracle::random_map(16, 16, 7, 0.0, 255.0);
    const RealMap prob(16, 16, 0.3);
    CHECK(loss_residual_distance(cover, cover, prob, bank()) == 0.0);
    RealMap stego = cover;
    stego(7, 9) += 1.0;
    CHECK(loss_residual_distance(cover, stego, RealMap(16, 16, 0.0), bank()) == 0.0);
    CHECK(std::fabs(loss_residual_distance(cover, stego, prob, bank()) - oracle::l2(cover, stego, prob)) < 1e-9);
    CHECK(loss_residual_distance(cover, stego, prob, bank()) > 0.0);
    CHECK_THROWS_WITH_AS(loss_residual_distance(cover, stego, RealMap(16, 16, 0.9), bank()), "probability out of range",
                         std::invalid_argument);
    CHECK_THROWS_AS(loss_residual_distance(cover, RealMap(16, 17), prob, bank()), std::invalid_argument);
}

TEST_CASE("local variance map") {
    CHECK(max_abs_diff(local_variance_map(RealMap(16, 16, 42.0)), RealMap(16, 16, 0.0)) < 1e-12);
    RealMap board(16, 16);
    for (std::size_t y = 0; y < 16; ++y)
        for (std::size_t x = 0; x < 16; ++x) board(y, x) = static_cast<double>((x + y) % 2);
    CHECK(local_variance_map(board)(5, 6) == doctest::Approx(20.0 / 81.0));
    CHECK(local_variance_map(board)(6, 6) == doctest::Approx(20.0 / 81.0));

    RealMap edge(16, 16, 0.0);
    for (std::size_t y = 0; y < 16; ++y)
        for (std::size_t x = 8; x < 16; ++x) edge(y, x) = 255.0;
    const RealMap s = local_variance_map(edge);
    CHECK(s(4, 7) > s(4, 2));
    CHECK(s(4, 8) > s(4, 13));

    const RealMap cover = oracle::random_map(16, 16, 8, 0.0, 255.0);
    CHECK(max_abs_diff(local_variance_map(cover), oracle::variance(cover)) < 1e-9);
}

TEST_CASE("smooth mask") {
    SUBCASE("ties fill raster-first") {
        const RealMap f = smooth_mask(RealMap(16, 16, 0.0), 0.5);
        for (std::size_t i = 0; i < 256; ++i) CHECK(f[i] == (i < 128 ? 1.0 : 0.0));
    }
    SUBCASE("increasing variance") {
        RealMap s(16, 16);
        for (std::size_t i = 0; i < 256; ++i) s[i] = static_cast<double>(i);
        const RealMap f = smooth_mask(s, 0.25);
        for (std::size_t i = 0; i < 256; ++i) CHECK(f[i] == (i < 64 ? 1.0 : 0.0));
    }
    SUBCASE("random variance matches sorting") {
        for (unsigned t = 0; t < 5; ++t) {
            const RealMap s = oracle::random_map(16, 16, 20 + t, 0.0, 10.0);
            const RealMap f = smooth_mask(s, 0.37);
            CHECK(f == oracle::mask(s, 0.37));
            CHECK(f.sum() == std::floor(0.37 * 256));
            double max_in = -1.0;
            double min_out = 1e300;
            for (std::size_t i = 0; i < 256; ++i) {
                if (f[i] == 1.0) {
                    max_in = std::max(max_in, s[i]);
                } else {
                    min_out = std::min(min_out, s[i]);
                }
            }
            CHECK(max_in <= min_out);
        }
    }
    SUBCASE("ties straddling the threshold") {
        RealMap s(4, 4, 1.0);
        s[0] = 0.0;
        const RealMap f = smooth_mask(s, 0.25);
        CHECK(f == oracle::mask(s, 0.25));
        CHECK(f[0] == 1.0);
        CHECK(f[1] == 1.0);
        CHECK(f[3] == 1.0);
        CHECK(f[4] == 0.0);
    }
    CHECK_THROWS_AS(smooth_mask(RealMap(4, 4), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(smooth_mask(RealMap(4, 4), 1.0), std::invalid_argument);
}

TEST_CASE("local variance loss") {
    CHECK(loss_local_variance(RealMap(16, 16, 1.0), RealMap(16, 16, 0.0)) == 0.0);
    CHECK(loss_local_variance(RealMap(16, 16, 1.0), RealMap(16, 16, 0.4)) == doctest::Approx(0.4));
    const RealMap f = oracle::mask(oracle::random_map(16, 16, 30, 0.0, 1.0), 0.5);
    const RealMap p = oracle::random_map(16, 16, 31, 0.0, 2.0 / 3.0);
    CHECK(std::fabs(loss_local_variance(f, p) - oracle::l3(f, p)) < 1e-12);
}

TEST_CASE("ternary entropy and payload loss") {
    const GuidanceConfig cfg;
    CHECK(ternary_entropy(2.0 / 3.0) == doctest::Approx(std::log2(3.0)).epsilon(1e-12));
    CHECK(ternary_entropy(0.5) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(ternary_entropy(0.0) == 0.0);
    double prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double p = (2.0 / 3.0) * i / 1001.0;
        const double h = ternary_entropy(p);
        CHECK(h > prev);
        CHECK(std::fabs(h - oracle::entropy(p)) < 1e-12);
        const double fd = (ternary_entropy(p + 1e-7) - ternary_entropy(p - 1e-7)) / 2e-7;
        CHECK(ternary_entropy_derivative(p) == doctest::Approx(fd).epsilon(1e-5));
        prev = h;
    }

    CHECK(loss_payload(RealMap(16, 16, 0.0), 0.4, cfg) == doctest::Approx(10485.76).epsilon(1e-12));
    const double p = probability_for_payload(0.4);
    CHECK(loss_payload(RealMap(16, 16, p), 0.4, cfg) < 1e-12);
    const RealMap rp = oracle::random_map(16, 16, 40, 0.0, 2.0 / 3.0);
    CHECK(std::fabs(loss_payload(rp, 0.4, cfg) - oracle::l4(rp, 0.4)) < 1e-9);
    CHECK_THROWS_WITH_AS(loss_payload(rp, 0.0, cfg), "payload out of range", std::invalid_argument);
    CHECK_THROWS_WITH_AS(loss_payload(rp, 1.6, cfg), "payload out of range", std::invalid_argument);
    CHECK_THROWS_WITH_AS(loss_payload(RealMap(16, 16, -0.1), 0.4, cfg), "probability out of range", std::invalid_argument);
}

TEST_CASE("weighted total") {
    const LossWeights w;
    const LossComponents ones{1.0, 1.0, 1.0, 1.0};
    CHECK(loss_total(ones, w, ComponentSet::all()).total == doctest::Approx(1011.0001).epsilon(1e-14));
    CHECK(loss_total({2.0, 5.0, 7.0, 0.0}, w, ComponentSet::none().with(Component::RG)).total == 2.0);
    CHECK(loss_total({2.0, 5.0, 7.0, 3.0}, w, ComponentSet::none()).total == doctest::Approx(3e-4));
    const LossBreakdown b = loss_total({2.0, 5.0, 7.0, 3.0}, w, ComponentSet::none().with(Component::LVG));
    CHECK(b.l2 == 5.0);
    CHECK(b.total == doctest::Approx(7000.0003));
    CHECK(b.active == ComponentSet::none().with(Component::LVG));
}

TEST_CASE("component sets") {
    CHECK(ComponentSet::all().to_string() == "RG+RDG+LVG");
    CHECK(ComponentSet::none().to_string() == "none");
    CHECK(ComponentSet::parse("rdg,lvg") == ComponentSet::none().with(Component::RDG).with(Component::LVG));
    CHECK(ComponentSet::parse("RG+LVG") == ComponentSet::none().with(Component::RG).with(Component::LVG));
    CHECK(ComponentSet::parse("") == ComponentSet::none());
    CHECK_THROWS_AS(ComponentSet::parse("xyz"), std::invalid_argument);
    CHECK(ComponentSet::all_subsets().size() == 8);
    const auto nonempty = ComponentSet::nonempty_subsets();
    CHECK(nonempty.size() == 7);
    for (std::size_t i = 0; i < nonempty.size(); ++i) {
        CHECK(nonempty[i] != ComponentSet::none());
        for (std::size_t j = i + 1; j < nonempty.size(); ++j) CHECK(nonempty[i] != nonempty[j]);
    }
}

TEST_CASE("loss csv row") {
    LossBreakdown b{0.5, 0.25, 0.125, 2.0, 3.0, ComponentSet::parse("rg")};
    CHECK(loss_csv_header() == "step,l1,l2,l3,l4,total,active");
    CHECK(loss_csv_row(3, b) == "3,0.5,0.25,0.125,2,3,RG");
}

TEST_CASE("configuration validation") {
    GuidanceConfig g;
    g.r = 1.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    g = {};
    g.eps_recip = 0.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    LossWeights w;
    w.beta = -1.0;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    w = {};
    w.gamma = INFINITY;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}
