#include "fbr/rate_analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "fbr/numerics.hpp"

namespace fbr {

namespace {

constexpr double kQuadRel = 1e-9;
constexpr double kQuadAbs = 1e-12;

double r0_average(const NetworkConfig& cfg, const std::function<double(double)>& term) {
    const ServingDistance law(cfg.lambda);
    auto f = [&](double r) { return law.pdf(r) * term(r); };
    return integrate(f, IntegrationSpec::finite(0.0, law.truncation(), 1e-8, 1e-11));
}

}  // namespace

void CodingConfig::validate() const {
    if (n < 1) throw DomainError("blocklength n must be >= 1");
    if (!(eps > 0.0 && eps < 0.5)) throw DomainError("FER must lie in (0, 0.5)");
}

double CodingConfig::backoff() const {
    return q_inverse(eps) / std::sqrt(static_cast<double>(n));
}

double CodingConfig::correction() const {
    const double nn = static_cast<double>(n);
    return std::log2(nn) / (2.0 * nn);
}

RateResult RateResult::compose(double capacity, double sqrt_dispersion,
                               const CodingConfig& coding) {
    RateResult r;
    r.capacity_term = capacity;
    r.dispersion_term = sqrt_dispersion * coding.backoff();
    r.correction_term = coding.correction();
    r.rate = r.capacity_term - r.dispersion_term + r.correction_term;
    r.clamped = std::max(r.rate, 0.0);
    return r;
}

double awgn_sqrt_dispersion(double alpha) {
    if (std::isinf(alpha)) return kLog2e;
    return kLog2e * std::sqrt(alpha * (alpha + 2.0)) / (alpha + 1.0);
}

RateResult awgn_fbr_rate(double alpha, const CodingConfig& coding) {
    if (!(alpha >= 0.0)) throw DomainError("awgn_fbr_rate: alpha must be >= 0");
    coding.validate();
    return RateResult::compose(std::log2(1.0 + alpha), awgn_sqrt_dispersion(alpha), coding);
}

double avg_capacity_ar(const LinkGeometry& geom, const NetworkConfig& cfg) {
    const double a0 = geom.avg_snr;
    if (!(a0 > 0.0)) return 0.0;
    const double scale = std::pow(geom.r0, cfg.eta) / cfg.power;
    auto f = [&](double c) {
        const double x = std::exp2(c) - 1.0;
        const double fade = std::isinf(a0) ? 1.0 : std::exp(-x / a0);
        if (fade == 0.0) return 0.0;
        return fade * laplace_b_gaussian(x * scale, cfg, geom.r0);
    };
    if (std::isinf(a0)) return integrate(f, IntegrationSpec::semi_infinite(0.0, kQuadRel, kQuadAbs));
    // exp(-(2^c - 1)/a0) < 1e-14 beyond this point
    const double c_max = std::log2(1.0 + a0 * std::log(1e14));
    return integrate(f, IntegrationSpec::finite(0.0, c_max, kQuadRel, kQuadAbs));
}

double avg_sqrt_dispersion(const LinkGeometry& geom, const NetworkConfig& cfg) {
    const double a0 = geom.avg_snr;
    if (!(a0 > 0.0)) return 0.0;
    const double scale = std::pow(geom.r0, cfg.eta) / cfg.power;
    // v = log2(e) sin(phi), so z(v) = sec(phi) - 1.
    auto f = [&](double phi) {
        const double c = std::cos(phi);
        if (c <= 0.0) return 0.0;
        const double z = 1.0 / c - 1.0;
        const double fade = std::isinf(a0) ? 1.0 : std::exp(-z / a0);
        if (fade == 0.0) return 0.0;
        const double lt = laplace_b_gaussian(z * scale, cfg, geom.r0);
        return fade * lt * kLog2e * c;
    };
    return integrate(f, IntegrationSpec::finite(0.0, std::numbers::pi / 2.0, kQuadRel, kQuadAbs));
}

RateResult avg_rate_fixed_r0(const LinkGeometry& geom, const NetworkConfig& cfg,
                             const CodingConfig& coding) {
    coding.validate();
    return RateResult::compose(avg_capacity_ar(geom, cfg), avg_sqrt_dispersion(geom, cfg), coding);
}

double spatial_capacity_ar(const NetworkConfig& cfg) {
    cfg.validate();
    return r0_average(cfg, [&](double r) { return avg_capacity_ar(LinkGeometry::make(cfg, r), cfg); });
}

double spatial_sqrt_dispersion(const NetworkConfig& cfg) {
    cfg.validate();
    return r0_average(cfg,
                      [&](double r) { return avg_sqrt_dispersion(LinkGeometry::make(cfg, r), cfg); });
}

RateResult avg_rate_spatial(const NetworkConfig& cfg, const CodingConfig& coding) {
    coding.validate();
    return RateResult::compose(spatial_capacity_ar(cfg), spatial_sqrt_dispersion(cfg), coding);
}

}  // namespace fbr

namespace fbr {

SuccessRegion fbr_success_region(double target_rate, const CodingConfig& coding) {
    coding.validate();
    const double backoff = coding.backoff();
    const double b = coding.correction();
    auto rate = [&](double lv) {
        const double v = std::exp(lv);
        return std::log2(1.0 + v) - awgn_sqrt_dispersion(v) * backoff + b - target_rate;
    };
    // The minimum sits where d/dv of the rate vanishes, well inside [e^-40, e^40].
    const auto [lmin, fmin] = boost::math::tools::brent_find_minima(rate, -40.0, 40.0, 52);
    SuccessRegion region;
    if (fmin >= 0.0) {
        region.below = region.above = std::numeric_limits<double>::infinity();
        return region;
    }
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    auto hi = boost::math::tools::bisect(rate, lmin, 60.0, tol, iters);
    region.above = std::exp(0.5 * (hi.first + hi.second));
    if (b > target_rate) {
        iters = 200;
        auto lo = boost::math::tools::bisect(rate, -60.0, lmin, tol, iters);
        region.below = std::exp(0.5 * (lo.first + lo.second));
    }
    return region;
}

}  // namespace fbr
