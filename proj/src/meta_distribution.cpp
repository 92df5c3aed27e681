#include "fbr/meta_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace fbr {

namespace {

using cd = std::complex<double>;

// (1 - (1 + y)^{-d}) without cancellation for small y.
cd one_minus_pow(double y, cd d) {
    const cd z = -d * std::log1p(y);
    if (std::abs(z) < 1e-4) return -(z + z * z / 2.0 + z * z * z / 6.0);
    return 1.0 - std::exp(z);
}

double moment_prefactor(const MetaQuery& query, const NetworkConfig& cfg) {
    return 2.0 * std::numbers::pi * cfg.lambda * query.r0 * query.r0 / (cfg.eta - 2.0);
}

// Memoized characteristic function of ln P_s, shared across p_t values.
class LogSuccessCharfn {
public:
    LogSuccessCharfn(const MetaQuery& q, const NetworkConfig& cfg) : q_(q), cfg_(cfg) {}

    cd operator()(double t) {
        auto it = cache_.find(t);
        if (it != cache_.end()) return it->second;
        const cd v = approx_moment(cd(0.0, t), q_, cfg_);
        cache_.emplace(t, v);
        return v;
    }

private:
    MetaQuery q_;
    NetworkConfig cfg_;
    std::map<double, cd> cache_;
};

IntegrationSpec meta_spec() {
    IntegrationSpec s = IntegrationSpec::finite(1e-6, 4.0, 1e-6, 2e-5);
    s.max_subdivisions = 200000;
    return s;
}

GilPelaezResult ccdf_from(LogSuccessCharfn& phi, double p_t) {
    auto f = [&](double t) { return phi(t); };
    GilPelaezResult r = gil_pelaez(f, std::log(p_t), meta_spec());
    r.raw = 1.0 - r.raw;
    r.value = std::clamp(r.raw, 0.0, 1.0);
    return r;
}

}  // namespace

void MetaQuery::validate() const {
    if (!(target_rate >= 0.0)) throw DomainError("MetaQuery: target rate must be >= 0");
    if (!(p_t > 0.0 && p_t < 1.0)) throw DomainError("MetaQuery: p_t must lie in (0, 1)");
    if (!(r0 > 0.0)) throw DomainError("MetaQuery: r0 must be positive");
    if (!asymptotic) coding.validate();
}

double MetaQuery::threshold() const {
    double shift = 0.0;
    if (!asymptotic) shift = kLog2e * coding.backoff() - coding.correction();
    return std::exp2(target_rate + shift) - 1.0;
}

cd approx_moment(cd d, const MetaQuery& query, const NetworkConfig& cfg) {
    query.validate();
    cfg.validate();
    if (d.real() < 0.0) throw DomainError("approx_moment: Re(d) must be >= 0");
    const double T = query.threshold();
    if (T <= 0.0) return 1.0;
    const double p = cfg.eta / (cfg.eta - 2.0);
    // x = (r0/r)^eta = s^p maps the radial integral onto (0, 1].
    auto f = [&](double s) -> cd {
        const double x = std::pow(s, p);
        if (x == 0.0) return d * T;
        return one_minus_pow(T * x, d) / x;
    };
    IntegrationSpec spec = IntegrationSpec::finite(0.0, 1.0, 1e-11, 1e-15);
    spec.max_subdivisions = 100000;
    return std::exp(-moment_prefactor(query, cfg) * integrate_complex(f, spec));
}

double approx_moment(double d, const MetaQuery& query, const NetworkConfig& cfg) {
    return approx_moment(cd(d, 0.0), query, cfg).real();
}

double approx_moment_eta4(const MetaQuery& query, const NetworkConfig& cfg) {
    query.validate();
    if (cfg.eta != 4.0) throw DomainError("approx_moment_eta4: eta must be 4");
    const double T = query.threshold();
    if (T <= 0.0) return 1.0;
    const double st = std::sqrt(T);
    return std::exp(-std::numbers::pi * cfg.lambda * query.r0 * query.r0 * st * std::atan(st));
}

MomentSet moment_set(const MetaQuery& query, const NetworkConfig& cfg) {
    MomentSet m;
    m.m1 = approx_moment(1.0, query, cfg);
    m.m2 = approx_moment(2.0, query, cfg);
    const double var = m.m2 - m.m1 * m.m1;
    m.degenerate = !(var > 1e-14) || !(m.m1 < 1.0) || !(m.m1 > 0.0);
    if (!m.degenerate) m.beta = {m.m1, (m.m1 - m.m2) * (1.0 - m.m1) / var};
    return m;
}

double success_prob_approx(const NetworkRealization& net, const MetaQuery& query,
                           const NetworkConfig& cfg) {
    const double T = query.threshold();
    if (T <= 0.0) return 1.0;
    double prod = 1.0;
    for (double r : net.distances) prod /= 1.0 + T * std::pow(net.r0 / r, cfg.eta);
    return prod;
}

double success_prob_exact(const NetworkRealization& net, const MetaQuery& query,
                          const NetworkConfig& cfg, std::size_t draws, Rng& rng) {
    if (draws == 0) throw DomainError("success_prob_exact: draws must be >= 1");
    SuccessRegion region;
    if (query.asymptotic) {
        region.above = std::exp2(query.target_rate) - 1.0;
    } else {
        region = fbr_success_region(query.target_rate, query.coding);
    }
    std::vector<double> rel(net.distances.size());
    for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = std::pow(net.r0 / net.distances[i], cfg.eta);
    std::exponential_distribution<double> expo(1.0);
    std::size_t ok = 0;
    for (std::size_t f = 0; f < draws; ++f) {
        const double h0 = expo(rng);
        double den = 0.0;
        for (double x : rel) den += expo(rng) * x;
        const double omega = den > 0.0 ? h0 / den : std::numeric_limits<double>::infinity();
        ok += region.success(omega) ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(draws);
}

GilPelaezResult meta_ccdf_gilpelaez_detailed(const MetaQuery& query, const NetworkConfig& cfg) {
    query.validate();
    LogSuccessCharfn phi(query, cfg);
    return ccdf_from(phi, query.p_t);
}

double meta_cdf_gilpelaez(const MetaQuery& query, const NetworkConfig& cfg) {
    return meta_ccdf_gilpelaez_detailed(query, cfg).value;
}

std::vector<double> meta_ccdf_gilpelaez(const MetaQuery& query, const NetworkConfig& cfg,
                                        const std::vector<double>& p_grid) {
    query.validate();
    LogSuccessCharfn phi(query, cfg);
    std::vector<double> out;
    out.reserve(p_grid.size());
    for (double p : p_grid) {
        if (!(p > 0.0 && p < 1.0)) throw DomainError("meta_ccdf_gilpelaez: p_t must lie in (0, 1)");
        out.push_back(ccdf_from(phi, p).value);
    }
    return out;
}

double meta_cdf_beta(const MomentSet& m, double p_t) {
    if (m.degenerate) return p_t < m.m1 ? 1.0 : 0.0;
    return 1.0 - reg_inc_beta(p_t, m.beta.shape_a(), m.beta.shape_b());
}

double meta_cdf_beta(const MetaQuery& query, const NetworkConfig& cfg) {
    return meta_cdf_beta(moment_set(query, cfg), query.p_t);
}

}  // namespace fbr
