#include "fbr/ppp_simulator.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "fbr/numerics.hpp"
#include "fbr/parallel.hpp"

namespace fbr {

namespace {

double path_loss(double r2, double eta) {
    if (eta == 4.0) return 1.0 / (r2 * r2);
    return std::pow(r2, -0.5 * eta);
}

// Draws the geometry and fading in place so buffers are reused across calls.
void sample_into(NetworkRealization& net, const NetworkConfig& cfg, const SimPlan& plan,
                 double radius2, Rng& rng) {
    std::exponential_distribution<double> expo(1.0);
    const double pil = std::numbers::pi * cfg.lambda;
    net.distances.clear();
    net.gains.clear();
    net.interference = 0.0;
    double acc = 0.0;
    double base = 0.0;
    if (plan.fixed_r0) {
        net.r0 = plan.r0;
        base = plan.r0 * plan.r0;
    } else {
        acc = expo(rng);
        net.r0 = std::sqrt(acc / pil);
    }
    const double limit2 = std::max(radius2, 4.0 * net.r0 * net.r0);
    for (;;) {
        acc += expo(rng);
        const double r2 = base + acc / pil;
        if (r2 > limit2) break;
        const double g = expo(rng);
        net.distances.push_back(std::sqrt(r2));
        net.gains.push_back(g);
        net.interference += cfg.power * g * path_loss(r2, cfg.eta);
    }
    net.h0_gain = expo(rng);
}

double t_quantile(std::size_t dof, double confidence) {
    boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 0.5 + 0.5 * confidence);
}

void check_rate_mode(RateMode mode, const Constellation* c) {
    if (mode == RateMode::qam && c == nullptr)
        throw DomainError("qam mode needs a constellation");
}

}  // namespace

Rng substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

void SimPlan::validate(const NetworkConfig& cfg) const {
    cfg.validate();
    if (realizations < 1) throw DomainError("SimPlan: realizations must be >= 1");
    if (fading_draws < 1) throw DomainError("SimPlan: fading_draws must be >= 1");
    if (batches < 2) throw DomainError("SimPlan: batches must be >= 2");
    if (!(region_scale >= 10.0)) throw DomainError("SimPlan: region_scale must be >= 10");
    if (fixed_r0 && !(r0 > 0.0)) throw DomainError("SimPlan: r0 must be positive");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw DomainError("SimPlan: confidence must lie in (0, 1)");
}

double SimPlan::region_radius(const NetworkConfig& cfg) const {
    const double r = region_scale / std::sqrt(std::numbers::pi * cfg.lambda);
    return fixed_r0 ? std::max(r, 10.0 * r0) : r;
}

double NetworkRealization::signal(const NetworkConfig& cfg) const {
    return cfg.power * h0_gain * std::pow(r0, -cfg.eta);
}

double NetworkRealization::sinr(const NetworkConfig& cfg) const {
    return signal(cfg) / (interference + cfg.noise);
}

double NetworkRealization::sir(const NetworkConfig& cfg) const {
    if (interference == 0.0) return std::numeric_limits<double>::infinity();
    return signal(cfg) / interference;
}

double LinkSample::sinr(const NetworkConfig& cfg) const {
    const double den = interference + cfg.noise;
    const double sig = cfg.power * h0_gain * std::pow(r0, -cfg.eta);
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return sig / den;
}

NetworkRealization sample_realization(const NetworkConfig& cfg, const SimPlan& plan, Rng& rng) {
    plan.validate(cfg);
    NetworkRealization net;
    const double radius = plan.region_radius(cfg);
    sample_into(net, cfg, plan, radius * radius, rng);
    return net;
}

void redraw_fading(NetworkRealization& net, const NetworkConfig& cfg, Rng& rng) {
    std::exponential_distribution<double> expo(1.0);
    net.h0_gain = expo(rng);
    net.interference = 0.0;
    for (std::size_t i = 0; i < net.distances.size(); ++i) {
        net.gains[i] = expo(rng);
        const double r2 = net.distances[i] * net.distances[i];
        net.interference += cfg.power * net.gains[i] * path_loss(r2, cfg.eta);
    }
}

std::vector<LinkSample> sample_links(const NetworkConfig& cfg, const SimPlan& plan,
                                     std::uint64_t tag) {
    plan.validate(cfg);
    const double radius = plan.region_radius(cfg);
    const std::size_t F = plan.fading_draws;
    std::vector<LinkSample> out(plan.realizations * F);
    parallel_for(plan.batches, plan.threads, [&](std::size_t b) {
        Rng rng = substream(plan.seed, tag, b);
        NetworkRealization net;
        for (std::size_t i = b; i < plan.realizations; i += plan.batches) {
            sample_into(net, cfg, plan, radius * radius, rng);
            for (std::size_t f = 0; f < F; ++f) {
                if (f > 0) redraw_fading(net, cfg, rng);
                out[i * F + f] = {net.r0, net.h0_gain, net.interference};
            }
        }
    });
    return out;
}

Estimate batch_means(const std::vector<double>& values, std::size_t batches, double confidence) {
    const std::size_t n = values.size();
    if (n < 2) throw DomainError("batch_means: need at least two samples");
    batches = std::clamp<std::size_t>(batches, 2, n);
    std::vector<double> sums(batches, 0.0);
    std::vector<std::size_t> counts(batches, 0);
    for (std::size_t i = 0; i < n; ++i) {
        sums[i % batches] += values[i];
        ++counts[i % batches];
    }
    double total = 0.0;
    for (double s : sums) total += s;
    Estimate e;
    e.samples = n;
    e.mean = total / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
        const double d = sums[b] / static_cast<double>(counts[b]) - e.mean;
        ss += d * d;
    }
    const double var_of_mean = ss / static_cast<double>(batches - 1) / static_cast<double>(batches);
    e.std_error = std::sqrt(var_of_mean);
    const double half = t_quantile(batches - 1, confidence) * e.std_error;
    e.ci_low = e.mean - half;
    e.ci_high = e.mean + half;
    return e;
}

Estimate proportion_estimate(std::size_t hits, std::size_t trials, double confidence) {
    if (trials == 0) throw DomainError("proportion_estimate: no trials");
    const double n = static_cast<double>(trials);
    const double adj = (static_cast<double>(hits) + 1.0) / (n + 2.0);
    Estimate e;
    e.samples = trials;
    e.mean = static_cast<double>(hits) / n;
    e.std_error = std::sqrt(adj * (1.0 - adj) / n);
    const double z = q_inverse(0.5 * (1.0 - confidence));
    e.ci_low = std::max(0.0, e.mean - z * e.std_error);
    e.ci_high = std::min(1.0, e.mean + z * e.std_error);
    return e;
}

EmpiricalRate empirical_avg_rate(const std::vector<LinkSample>& samples, const NetworkConfig& cfg,
                                 const CodingConfig& coding, std::size_t batches,
                                 double confidence, RateMode mode,
                                 const Constellation* constellation) {
    coding.validate();
    check_rate_mode(mode, constellation);
    const CondRateTable* table =
        mode == RateMode::qam ? &CondRateTable::get(*constellation) : nullptr;
    std::vector<double> cap(samples.size()), sd(samples.size()), rate(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double v = samples[i].sinr(cfg);
        if (table) {
            cap[i] = table->mi(v);
            sd[i] = table->sqrt_disp(v);
        } else {
            cap[i] = std::isinf(v) ? std::numeric_limits<double>::infinity() : std::log2(1.0 + v);
            sd[i] = awgn_sqrt_dispersion(v);
        }
        rate[i] = RateResult::compose(cap[i], sd[i], coding).rate;
    }
    return {batch_means(rate, batches, confidence), batch_means(cap, batches, confidence),
            batch_means(sd, batches, confidence)};
}

EmpiricalRate empirical_avg_rate(const NetworkConfig& cfg, const CodingConfig& coding,
                                 const SimPlan& plan, RateMode mode,
                                 const Constellation* constellation) {
    const auto samples = sample_links(cfg, plan);
    return empirical_avg_rate(samples, cfg, coding, plan.batches, plan.confidence, mode,
                              constellation);
}

Estimate empirical_outage(const std::vector<LinkSample>& samples, const NetworkConfig& cfg,
                          double target_rate, const CodingConfig& coding, double confidence,
                          RateMode mode, const Constellation* constellation) {
    coding.validate();
    check_rate_mode(mode, constellation);
    // the rate is clamped at zero, so a nonpositive target is always met
    if (target_rate <= 0.0) return proportion_estimate(0, samples.size(), confidence);
    std::size_t hits = 0;
    if (mode == RateMode::gaussian) {
        const SuccessRegion region = fbr_success_region(target_rate, coding);
        for (const auto& s : samples) hits += region.success(s.sinr(cfg)) ? 0 : 1;
    } else {
        for (const auto& s : samples)
            hits += qam_fbr_rate(*constellation, s.sinr(cfg), coding).rate < target_rate ? 1 : 0;
    }
    return proportion_estimate(hits, samples.size(), confidence);
}

Estimate empirical_outage(const NetworkConfig& cfg, double target_rate, const CodingConfig& coding,
                          const SimPlan& plan, RateMode mode,
                          const Constellation* constellation) {
    const auto samples = sample_links(cfg, plan);
    return empirical_outage(samples, cfg, target_rate, coding, plan.confidence, mode,
                            constellation);
}

double EmpiricalMeta::ccdf(const std::vector<double>& ps, double p_t) {
    if (ps.empty()) return 0.0;
    std::size_t k = 0;
    for (double p : ps) k += p > p_t ? 1 : 0;
    return static_cast<double>(k) / static_cast<double>(ps.size());
}

EmpiricalMeta empirical_meta(const NetworkConfig& cfg, double target_rate,
                             const CodingConfig& coding, const SimPlan& plan, bool include_noise) {
    plan.validate(cfg);
    coding.validate();
    if (!plan.fixed_r0) throw DomainError("empirical_meta: needs a fixed serving distance");
    const double shift = kLog2e * coding.backoff() - coding.correction();
    const double T = std::exp2(target_rate + shift) - 1.0;
    const SuccessRegion region = fbr_success_region(target_rate, coding);
    const double radius = plan.region_radius(cfg);
    const double noise_term = include_noise ? cfg.noise / cfg.power : 0.0;
    const double r0_loss = std::pow(plan.r0, -cfg.eta);

    EmpiricalMeta out;
    out.exact.resize(plan.realizations);
    out.approx.resize(plan.realizations);
    parallel_for(plan.realizations, plan.threads, [&](std::size_t i) {
        Rng rng = substream(plan.seed, 0x6d657461, i);
        NetworkRealization net;
        sample_into(net, cfg, plan, radius * radius, rng);
        std::vector<double> loss(net.distances.size());
        double prod = 1.0;
        for (std::size_t k = 0; k < loss.size(); ++k) {
            loss[k] = path_loss(net.distances[k] * net.distances[k], cfg.eta);
            prod /= 1.0 + T * loss[k] / r0_loss;
        }
        out.approx[i] = T > 0.0 ? prod : 1.0;

        std::exponential_distribution<double> expo(1.0);
        std::size_t ok = 0;
        for (std::size_t f = 0; f < plan.fading_draws; ++f) {
            const double h0 = expo(rng);
            double den = noise_term;
            for (double l : loss) den += expo(rng) * l;
            const double omega = den > 0.0 ? h0 * r0_loss / den
                                           : std::numeric_limits<double>::infinity();
            ok += region.success(omega) ? 1 : 0;
        }
        out.exact[i] = static_cast<double>(ok) / static_cast<double>(plan.fading_draws);
    });
    return out;
}

}  // namespace fbr
