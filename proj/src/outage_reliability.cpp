#include "fbr/outage_reliability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fbr/numerics.hpp"

namespace fbr {

namespace {

SimPlan plan_for(const OutageQuery& query, const SimPlan& plan) {
    SimPlan p = plan;
    p.fixed_r0 = query.r0.has_value();
    if (query.r0) p.r0 = *query.r0;
    return p;
}

}  // namespace

PenaltyTerms penalty_terms(const CodingConfig& coding) {
    coding.validate();
    return {kLog2e * coding.backoff(), coding.correction()};
}

void OutageQuery::validate() const {
    if (!(target_rate >= 0.0)) throw DomainError("target rate must be >= 0");
    coding.validate();
    if (r0 && !(*r0 > 0.0)) throw DomainError("r0 must be positive");
}

double OutageQuery::shifted_rate() const {
    const PenaltyTerms t = penalty_terms(coding);
    return target_rate + t.a - t.b;
}

double outage_ar(double r0, double target_rate, const NetworkConfig& cfg) {
    cfg.validate();
    if (!(r0 > 0.0)) throw DomainError("outage_ar: r0 must be positive");
    if (target_rate <= 0.0) return 0.0;
    if (std::isinf(target_rate)) return 1.0;
    const double mu = std::exp2(target_rate) - 1.0;
    const double scale = std::pow(r0, cfg.eta) / cfg.power;
    const double fade = cfg.interference_limited() ? 1.0 : std::exp(-mu * cfg.noise * scale);
    if (fade == 0.0) return 1.0;
    return std::clamp(1.0 - fade * laplace_b_gaussian(mu * scale, cfg, r0), 0.0, 1.0);
}

double outage_spatial_ar(double target_rate, const NetworkConfig& cfg) {
    cfg.validate();
    if (target_rate <= 0.0) return 0.0;
    if (std::isinf(target_rate)) return 1.0;
    const ServingDistance law(cfg.lambda);
    auto f = [&](double r) { return r > 0.0 ? law.pdf(r) * (1.0 - outage_ar(r, target_rate, cfg)) : 0.0; };
    const double cover = integrate(f, IntegrationSpec::finite(0.0, law.truncation(), 1e-10, 1e-13));
    return std::clamp(1.0 - cover, 0.0, 1.0);
}

double outage_spatial_ar_eta4(double target_rate, const NetworkConfig& cfg) {
    cfg.validate();
    if (cfg.eta != 4.0) throw DomainError("closed-form spatial outage needs eta = 4");
    if (target_rate <= 0.0) return 0.0;
    if (std::isinf(target_rate)) return 1.0;
    const double mu = std::exp2(target_rate) - 1.0;
    const double sm = std::sqrt(mu);
    const double pil = std::numbers::pi * cfg.lambda;
    const double B = pil * (1.0 + sm * std::atan(sm));
    if (cfg.interference_limited()) return 1.0 - pil / B;
    // pi lambda * int_0^inf exp(-A x^2 - B x) dx with x = r^2
    const double A = mu * cfg.noise / cfg.power;
    const double cover =
        pil * 0.5 * std::sqrt(std::numbers::pi / A) * erfcx(B / (2.0 * std::sqrt(A)));
    return std::clamp(1.0 - cover, 0.0, 1.0);
}

OutageBounds outage_bounds(double r0, const OutageQuery& query, const NetworkConfig& cfg) {
    query.validate();
    return {outage_ar(r0, query.target_rate, cfg), outage_ar(r0, query.shifted_rate(), cfg)};
}

double outage_spatial_upper(const OutageQuery& query, const NetworkConfig& cfg) {
    query.validate();
    return outage_spatial_ar(query.shifted_rate(), cfg);
}

double outage_spatial_eta4(const OutageQuery& query, const NetworkConfig& cfg) {
    query.validate();
    return outage_spatial_ar_eta4(query.shifted_rate(), cfg);
}

double reliability_from_outage(double outage, double eps_bar) {
    return (1.0 - outage) * (1.0 - eps_bar);
}

double reliability(const OutageQuery& query, const NetworkConfig& cfg, OutageSource source,
                   const SimPlan* plan) {
    query.validate();
    double outage = 0.0;
    if (source == OutageSource::simulated) {
        if (plan == nullptr) throw DomainError("simulated reliability needs a SimPlan");
        outage = empirical_outage(cfg, query.target_rate, query.coding, plan_for(query, *plan),
                                  RateMode::gaussian)
                     .mean;
    } else {
        outage = query.r0 ? outage_bounds(*query.r0, query, cfg).upper
                          : outage_spatial_upper(query, cfg);
    }
    return reliability_from_outage(outage, query.coding.eps);
}

double reliability_ar(double target_rate, const NetworkConfig& cfg, std::optional<double> r0) {
    return 1.0 - (r0 ? outage_ar(*r0, target_rate, cfg) : outage_spatial_ar(target_rate, cfg));
}

Estimate outage_qam_mc(const Constellation& c, const OutageQuery& query, const NetworkConfig& cfg,
                       const SimPlan& plan) {
    query.validate();
    if (query.target_rate >= c.bits() + query.coding.correction()) {
        Estimate e;
        e.mean = e.ci_low = e.ci_high = 1.0;
        e.samples = plan.realizations * plan.fading_draws;
        return e;
    }
    const SimPlan p = plan_for(query, plan);
    return empirical_outage(cfg, query.target_rate, query.coding, p, RateMode::qam, &c);
}

}  // namespace fbr
