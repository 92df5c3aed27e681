#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fbr/constellation_rate.hpp"
#include "fbr/ppp_simulator.hpp"
#include "fbr/rate_analysis.hpp"

using namespace fbr;

namespace {

SimPlan plan_of(std::size_t n, bool fixed, double r0 = 250.0, std::uint64_t seed = 11) {
    SimPlan p;
    p.realizations = n;
    p.fixed_r0 = fixed;
    p.r0 = r0;
    p.seed = seed;
    return p;
}

CodingConfig code(std::int64_t n, double eps) {
    CodingConfig c;
    c.n = n;
    c.eps = eps;
    return c;
}

}  // namespace

TEST_CASE("plan validation") {
    const auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, 0.0);
    auto p = plan_of(0, true);
    CHECK_THROWS(p.validate(cfg));
    p = plan_of(10, true);
    CHECK(p.region_radius(cfg) >= 30.0 / std::sqrt(std::numbers::pi * cfg.lambda) - 1e-9);
    p.r0 = 1e5;
    CHECK(p.region_radius(cfg) >= 10.0 * 1e5);
}

TEST_CASE("realization invariants") {
    const auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, 0.0);
    for (bool fixed : {true, false}) {
        auto p = plan_of(1, fixed);
        Rng rng(5);
        for (int i = 0; i < 50; ++i) {
            const auto net = sample_realization(cfg, p, rng);
            double b = 0.0;
            for (std::size_t k = 0; k < net.distances.size(); ++k) {
                CHECK(net.distances[k] > net.r0);
                if (k > 0) CHECK(net.distances[k] >= net.distances[k - 1]);
                b += net.gains[k] * std::pow(net.distances[k], -4.0);
            }
            CHECK(net.interference == doctest::Approx(b).epsilon(1e-12));
            CHECK(net.interference >= 0.0);
        }
    }
    NetworkRealization empty;
    empty.r0 = 100.0;
    auto il = cfg;
    il.noise = 0.0;
    CHECK(std::isinf(empty.sir(il)));
}

TEST_CASE("contact distance and point count") {
    const auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, 0.0);
    const auto links = sample_links(cfg, plan_of(100000, false));
    std::vector<double> r;
    for (const auto& s : links) r.push_back(s.r0);
    const ServingDistance law(cfg.lambda);
    CHECK(kolmogorov_distance(r, [&](double x) { return law.cdf(x); }) < 0.01);

    auto p = plan_of(1, true, 250.0);
    p.region_scale = 10.0;
    const double R = p.region_radius(cfg);
    const double mean = std::numbers::pi * cfg.lambda * (R * R - 250.0 * 250.0);
    Rng rng(9);
    double s = 0.0;
    const int N = 2000;
    for (int i = 0; i < N; ++i) s += static_cast<double>(sample_realization(cfg, p, rng).distances.size());
    CHECK(std::abs(s / N - mean) < 3.0 * std::sqrt(mean / N));
}

TEST_CASE("mean interference and truncation") {
    const auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, 0.0);
    const double r0 = 250.0;
    const double target = b_moments(cfg, r0).mean;
    auto p = plan_of(200000, true, r0);
    const auto links = sample_links(cfg, p);
    double s = 0.0;
    for (const auto& l : links) s += l.interference;
    CHECK(s / links.size() == doctest::Approx(target).epsilon(0.02));
    // deterministic part of the truncation: sum beyond R contributes 2 pi lambda R^{-2} / 2
    const double R = p.region_radius(cfg);
    const double tail = std::numbers::pi * cfg.lambda * std::pow(R, -2.0);
    CHECK(tail / target < 0.005);
}

TEST_CASE("reproducible and independent of thread count") {
    const auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, 0.0);
    auto p = plan_of(5000, false);
    const auto a = sample_links(cfg, p);
    p.threads = 3;
    const auto b = sample_links(cfg, p);
    REQUIRE(a.size() == b.size());
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i)
        same = same && a[i].r0 == b[i].r0 && a[i].h0_gain == b[i].h0_gain && a[i].interference == b[i].interference;
    CHECK(same);
    p.seed = 12;
    CHECK(sample_links(cfg, p)[0].r0 != a[0].r0);
    CHECK(substream(1, 2, 3)() == substream(1, 2, 3)());
    CHECK(substream(1, 2, 3)() != substream(1, 2, 4)());
}

TEST_CASE("estimators") {
    std::vector<double> v(6400);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i % 7);
    const auto e = batch_means(v, 64, 0.99);
    CHECK(e.mean == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(e.ci_low <= e.mean);
    CHECK(e.ci_high >= e.mean);
    const auto z = proportion_estimate(0, 1000, 0.99);
    CHECK(z.mean == 0.0);
    CHECK(z.ci_high > 0.0);
    CHECK(proportion_estimate(500, 1000, 0.99).contains(0.5));
}

TEST_CASE("empirical averages agree with the analysis") {
    const auto c = code(128, 1e-3);
    SUBCASE("no interference") {
        const auto cfg = NetworkConfig::from_snr_db(1e-9, 4.0, 10.0);
        const auto g = LinkGeometry::make(cfg, 250.0);
        const auto e = empirical_avg_rate(cfg, c, plan_of(100000, true), RateMode::gaussian);
        CHECK(e.capacity.contains(avg_capacity_ar(g, cfg)));
    }
    SUBCASE("fixed r0") {
        const auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, 0.0);
        const auto g = LinkGeometry::make(cfg, 250.0);
        const auto e = empirical_avg_rate(cfg, c, plan_of(100000, true), RateMode::gaussian);
        CHECK(e.capacity.contains(avg_capacity_ar(g, cfg)));
        CHECK(e.sqrt_dispersion.contains(avg_sqrt_dispersion(g, cfg)));
        CHECK(e.rate.contains(avg_rate_fixed_r0(g, cfg, c).rate));
    }
    SUBCASE("spatial") {
        const auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, 10.0);
        const auto e = empirical_avg_rate(cfg, c, plan_of(100000, false), RateMode::gaussian);
        CHECK(e.rate.contains(avg_rate_spatial(cfg, c).rate));
    }
    SUBCASE("16-QAM against the Gamma approximation") {
        const auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, 10.0);
        const auto q16 = make_qam(16);
        const auto g = LinkGeometry::make(cfg, 150.0);
        const auto e = empirical_avg_rate(cfg, code(128, 1e-2), plan_of(50000, true, 150.0), RateMode::qam, &q16);
        CHECK(std::abs(e.rate.mean - avg_rate_qam_fixed_r0(q16, g, cfg, code(128, 1e-2)).rate) < 0.05);
    }
}

TEST_CASE("empirical outage") {
    const auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, 0.0);
    const auto p = plan_of(20000, true, 200.0);
    CHECK(empirical_outage(cfg, 0.0, code(128, 1e-2), p, RateMode::gaussian).mean == 0.0);
    const auto e = empirical_outage(cfg, 1.0, code(128, 1e-6), p, RateMode::gaussian);
    CHECK(e.mean > 0.0);
    CHECK(e.mean < 1.0);
}

TEST_CASE("empirical meta distribution") {
    auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, 0.0);
    auto p = plan_of(200, true, 150.0);
    p.fading_draws = 500;
    p.region_scale = 10.0;
    const auto m = empirical_meta(cfg, 1.0, code(128, 1e-2), p, false);
    REQUIRE(m.exact.size() == 200);
    for (std::size_t i = 0; i < m.exact.size(); ++i) {
        CHECK(m.exact[i] >= 0.0);
        CHECK(m.exact[i] <= 1.0);
        CHECK(m.approx[i] > 0.0);
        CHECK(m.approx[i] <= 1.0);
    }
    CHECK(EmpiricalMeta::ccdf(m.approx, 0.0) == 1.0);
    CHECK(EmpiricalMeta::ccdf(m.approx, 1.0) == 0.0);
    const auto again = empirical_meta(cfg, 1.0, code(128, 1e-2), p, false);
    CHECK(again.exact == m.exact);
}
