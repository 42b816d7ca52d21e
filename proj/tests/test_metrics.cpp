#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "resguide/embedding.hpp"
#include "resguide/metrics.hpp"
#include "resguide/optimizer.hpp"
#include "resguide/synthetic.hpp"

using namespace resguide;

TEST_CASE("residual distance") {
    const Image cover = oracle::random_image(16, 16, 3);
    CHECK(residual_distance(cover, cover) == 0.0);
    Image stego = cover;
    stego(5, 6) = static_cast<std::uint8_t>(stego(5, 6) + 1);
    const RealMap x = image_to_realmap(cover);
    const RealMap y = image_to_realmap(stego);
    const double expect = oracle::l2(x, y, RealMap(16, 16, 1.0));
    CHECK(std::fabs(residual_distance(cover, stego) - expect) < 1e-12);
    CHECK(residual_distance(stego, cover) == doctest::Approx(residual_distance(cover, stego)).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(residual_distance(cover, Image(16, 17)), "dimension mismatch", std::invalid_argument);
}

TEST_CASE("spearman correlation") {
    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> b{10, 20, 30, 40, 50};
    const std::vector<double> c{5, 4, 3, 2, 1};
    CHECK(spearman(a, b) == doctest::Approx(1.0));
    CHECK(spearman(a, c) == doctest::Approx(-1.0));
    CHECK(spearman(a, std::vector<double>(5, 2.0)) == 0.0);
    const std::vector<double> ties{1, 2, 2, 3, 3, 3, 0, 7};
    const std::vector<double> other{4, 1, 5, 5, 2, 9, 0, 1};
    CHECK(spearman(ties, other) == doctest::Approx(oracle::spearman(ties, other)).epsilon(1e-12));
    const RealMap u = oracle::random_map(50, 1, 1, 0.0, 1.0);
    const RealMap v = oracle::random_map(50, 1, 2, 0.0, 1.0);
    const std::vector<double> uv(u.values().begin(), u.values().end());
    const std::vector<double> vv(v.values().begin(), v.values().end());
    CHECK(spearman(u.values(), v.values()) == doctest::Approx(oracle::spearman(uv, vv)).epsilon(1e-12));
}

TEST_CASE("texture affinity and mask ratio") {
    const Image cover = make_textured_cover(64, 64, 3);
    const RealMap tex = texture_map(cover);
    CHECK(texture_affinity(cover, ProbabilityMap(RealMap(64, 64, 0.3))) == 0.0);
    RealMap aligned(64, 64);
    const double mx = tex.max();
    for (std::size_t i = 0; i < aligned.size(); ++i) aligned[i] = 0.6 * tex[i] / mx;
    CHECK(texture_affinity(cover, ProbabilityMap(aligned)) == doctest::Approx(1.0));

    CHECK(mask_mass_ratio(cover, ProbabilityMap(RealMap(64, 64, 0.3))) == doctest::Approx(1.0));
    const RealMap f = oracle::mask(oracle::variance(image_to_realmap(cover)), 0.5);
    RealMap p(64, 64);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = f[i] == 1.0 ? 0.01 : 0.2;
    CHECK(mask_mass_ratio(cover, ProbabilityMap(p)) == doctest::Approx(0.05));
}

TEST_CASE("metrics report") {
    const Image cover = make_textured_cover(32, 32, 7);
    const ProbabilityMap zero = ProbabilityMap::uniform(32, 32, 0.0);
    const MetricsReport self = compute_metrics(cover, cover, zero);
    CHECK(self.change_rate == 0.0);
    CHECK(self.residual_distance == 0.0);
    CHECK(self.payload_bpp == 0.0);
    Image one = cover;
    one(3, 3) = static_cast<std::uint8_t>(one(3, 3) ^ 1);
    CHECK(compute_metrics(cover, one, zero).change_rate == 1.0 / 1024.0);
    CHECK(metrics_csv_header() == "change_rate,payload_bpp,residual_distance,prob_residual_rank_corr,mask_mass_ratio");
}

TEST_CASE("method comparison table") {
    const Image cover = make_textured_cover(32, 32, 9);
    const std::vector<std::uint64_t> seeds{3, 1, 2};
    const std::vector<NamedMap> maps{{"zero", ProbabilityMap::uniform(32, 32, 0.0)},
                                     {"uniform", ProbabilityMap::uniform(32, 32, probability_for_payload(0.4))},
                                     {"uniform-copy", ProbabilityMap::uniform(32, 32, probability_for_payload(0.4))}};
    const auto rows = compare_methods(cover, maps, seeds);
    REQUIRE(rows.size() == 12);
    CHECK(rows[0].method == "uniform");
    CHECK(rows[0].seed == "1");
    CHECK(rows[1].seed == "2");
    CHECK(rows[2].seed == "3");
    CHECK(rows[3].seed == "mean");
    CHECK(rows[4].method == "uniform-copy");
    CHECK(rows[8].method == "zero");
    for (int i = 0; i < 4; ++i) {
        CHECK(metrics_csv_row(rows[static_cast<std::size_t>(i)].metrics) ==
              metrics_csv_row(rows[static_cast<std::size_t>(i + 4)].metrics));
    }
    for (std::size_t i = 8; i < 12; ++i) {
        CHECK(rows[i].metrics.change_rate == 0.0);
        CHECK(rows[i].metrics.residual_distance == 0.0);
    }
    double mean_rate = 0.0;
    for (int i = 0; i < 3; ++i) mean_rate += rows[static_cast<std::size_t>(i)].metrics.change_rate / 3.0;
    CHECK(rows[3].metrics.change_rate == doctest::Approx(mean_rate));
    const std::string csv = comparison_csv(rows);
    CHECK(csv.rfind("method,seed,change_rate,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
}

TEST_CASE("change rate follows P across seeds") {
    const Image cover = make_textured_cover(64, 64, 1);
    const double p = 0.3;
    const ProbabilityMap prob = ProbabilityMap::uniform(64, 64, p);
    const double sigma = std::sqrt(p * (1 - p) / 4096.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Image stego = apply_modifications(cover, hard_sample(prob, make_noise(64, 64, seed, kFinalSampleStream)));
        CHECK(std::fabs(compute_metrics(cover, stego, prob).change_rate - p) < 3.5 * sigma);
    }
}
