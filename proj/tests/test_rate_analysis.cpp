#include <doctest.h>

#include <cmath>

#include "fbr/network_model.hpp"
#include "fbr/numerics.hpp"
#include "fbr/rate_analysis.hpp"

using namespace fbr;

namespace {

CodingConfig code(std::int64_t n, double eps) {
    CodingConfig c;
    c.n = n;
    c.eps = eps;
    return c;
}

}  // namespace

TEST_CASE("coding config") {
    CHECK_THROWS_AS(code(0, 0.1).validate(), DomainError);
    CHECK_THROWS_AS(code(128, 0.5).validate(), DomainError);
    CHECK_THROWS_AS(code(128, 0.0).validate(), DomainError);
    CHECK(code(128, 0.01).correction() == doctest::Approx(7.0 / 256.0));
}

TEST_CASE("awgn rate examples") {
    const auto z = awgn_fbr_rate(0.0, code(128, 0.01));
    CHECK(z.rate == doctest::Approx(7.0 / 256.0).epsilon(1e-12));
    CHECK(z.dispersion_term == 0.0);
    for (double a = 0.0; a <= 100.0; a += 5.0) {
        CHECK(awgn_fbr_rate(a, code(1000000000, 0.01)).rate - std::log2(1.0 + a) < 1e-3);
    }
    CHECK(awgn_fbr_rate(1.0, code(128, 1e-3)).rate == doctest::Approx(0.68608).epsilon(1e-5));
    const auto r = awgn_fbr_rate(3.0, code(200, 1e-4));
    CHECK(r.rate == doctest::Approx(r.capacity_term - r.dispersion_term + r.correction_term));
    CHECK(awgn_sqrt_dispersion(1e12) == doctest::Approx(kLog2e).epsilon(1e-9));
}

TEST_CASE("awgn rate monotonicity grid") {
    const std::int64_t ns[] = {8, 16, 64, 128, 512, 2048};
    const double epss[] = {1e-1, 1e-2, 1e-3, 1e-5, 1e-8};
    for (int i = 0; i < 20; ++i) {
        const double a = std::pow(10.0, -2.0 + 0.2 * i);
        for (std::size_t j = 0; j < 6; ++j) {
            for (std::size_t k = 0; k < 5; ++k) {
                const double r = awgn_fbr_rate(a, code(ns[j], epss[k])).rate;
                // the rate dips below its v = 0 value before growing, and at low SNR
                // the log2(n)/(2n) term makes it decrease in n
                if (a >= 1.0) {
                    CHECK(awgn_fbr_rate(a * 1.3, code(ns[j], epss[k])).rate >= r);
                    if (j + 1 < 6) CHECK(awgn_fbr_rate(a, code(ns[j + 1], epss[k])).rate >= r);
                }
                if (k + 1 < 5) CHECK(awgn_fbr_rate(a, code(ns[j], epss[k + 1])).rate <= r);
            }
        }
    }
}

TEST_CASE("success region splits where the rate crosses the target") {
    const auto c = code(128, 1e-3);
    for (double target : {0.01, 0.02, 0.5, 2.0}) {
        const auto reg = fbr_success_region(target, c);
        CHECK(reg.below <= reg.above);
        if (std::isfinite(reg.above)) {
            CHECK(awgn_fbr_rate(reg.above, c).rate == doctest::Approx(target).epsilon(1e-8));
            CHECK(reg.success(reg.above * 1.01));
            CHECK_FALSE(reg.success(reg.above * 0.99));
        }
        if (reg.below > 0.0) CHECK(awgn_fbr_rate(reg.below, c).rate == doctest::Approx(target).epsilon(1e-8));
        if (target >= c.correction()) CHECK(reg.below == 0.0);
    }
    CHECK(fbr_success_region(0.02, c).success(0.0));
    CHECK(fbr_success_region(-1.0, c).success(0.3));
}

TEST_CASE("fixed-r0 limits") {
    auto cfg = NetworkConfig::from_snr_db(1e-9, 4.0, 0.0);
    const double r0 = 250.0;
    const auto g = LinkGeometry::make(cfg, r0);
    // no interference: E log2(1 + a |h|^2) = log2(e) e^{1/a} E1(1/a)
    const double a = g.avg_snr;
    const double e1 = integrate([&](double t) { return std::exp(-t) / t; },
                                IntegrationSpec::semi_infinite(1.0 / a, 1e-12, 1e-14));
    CHECK(avg_capacity_ar(g, cfg) == doctest::Approx(kLog2e * std::exp(1.0 / a) * e1).epsilon(1e-7));

    auto quiet = NetworkConfig::from_snr_db(1e-9, 4.0, 120.0);
    CHECK(avg_sqrt_dispersion(LinkGeometry::make(quiet, r0), quiet) ==
          doctest::Approx(kLog2e).epsilon(1e-3));
    auto loud = NetworkConfig::from_snr_db(1.0, 4.0, -120.0);
    const auto gl = LinkGeometry::make(loud, r0);
    CHECK(avg_capacity_ar(gl, loud) < 1e-9);
    CHECK(avg_sqrt_dispersion(gl, loud) < 1e-3);
}

TEST_CASE("fixed-r0 rate structure") {
    const double r0 = 250.0;
    double prev_lambda = 1e9;
    for (double lam : {0.3, 1.0, 3.0, 10.0}) {
        auto cfg = NetworkConfig::from_snr_db(lam, 4.0, 0.0);
        const auto g = LinkGeometry::make(cfg, r0);
        const double cap = avg_capacity_ar(g, cfg);
        CHECK(cap < prev_lambda);
        prev_lambda = cap;
        const double sd = avg_sqrt_dispersion(g, cfg);
        CHECK(sd >= 0.0);
        CHECK(sd <= kLog2e);
        const auto c = code(128, 1e-3);
        const auto r = avg_rate_fixed_r0(g, cfg, c);
        CHECK(r.rate <= cap + c.correction() + 1e-15);
        CHECK(r.rate == doctest::Approx(cap - sd * q_inverse(c.eps) / std::sqrt(128.0) + c.correction()));
        const auto half = avg_rate_fixed_r0(g, cfg, code(128, 0.4999999));
        CHECK(half.rate == doctest::Approx(cap + c.correction()).epsilon(1e-5));
    }
    double prev = -1.0;
    for (double snr = -10.0; snr <= 30.0; snr += 10.0) {
        auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, snr);
        const double cap = avg_capacity_ar(LinkGeometry::make(cfg, r0), cfg);
        CHECK(cap > prev);
        prev = cap;
    }
}

TEST_CASE("interference-limited capacity") {
    auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, 0.0);
    cfg.noise = 0.0;
    const auto g = LinkGeometry::make(cfg, 250.0);
    CHECK(std::isinf(g.avg_snr));
    const double cap = avg_capacity_ar(g, cfg);
    CHECK(cap > 0.0);
    auto noisy = NetworkConfig::from_snr_db(1.0, 4.0, 20.0);
    CHECK(avg_capacity_ar(LinkGeometry::make(noisy, 250.0), noisy) < cap);
}

TEST_CASE("spatial average between percentile rates") {
    for (double snr : {0.0, 10.0}) {
        auto cfg = NetworkConfig::from_snr_db(1.0, 4.0, snr);
        const auto c = code(128, 1e-3);
        const double s = avg_rate_spatial(cfg, c).rate;
        const ServingDistance law(cfg.lambda);
        const double lo = avg_rate_fixed_r0(LinkGeometry::make(cfg, law.quantile(0.99)), cfg, c).rate;
        const double hi = avg_rate_fixed_r0(LinkGeometry::make(cfg, law.quantile(0.01)), cfg, c).rate;
        CHECK(s > lo);
        CHECK(s < hi);
        CHECK(spatial_sqrt_dispersion(cfg) <= kLog2e);
    }
    double prev = -1.0;
    for (double snr = -10.0; snr <= 20.0; snr += 10.0) {
        const double r = avg_rate_spatial(NetworkConfig::from_snr_db(1.0, 4.0, snr), code(128, 1e-3)).rate;
        CHECK(r > prev);
        prev = r;
    }
}
