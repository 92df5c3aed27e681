#include "fbr/network_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include <boost/math/special_functions/gamma.hpp>

#include "fbr/numerics.hpp"
#include "fbr/units.hpp"

namespace fbr {

namespace {

constexpr double kPi = std::numbers::pi;

// w * 2F1(1, b; b + 1; -w) with b = 1 - 2/eta, written as the integral of
// w / (1 + w s^{1/b}) over s in [0, 1] (t = s^{1/b} in the Euler form).
template <typename W>
W weighted_2f1(W w, double eta) {
    const double inv_b = eta / (eta - 2.0);
    if (std::abs(w) > 1e6) {
        // y = w^{b} s: w^{1-b} (integral of 1/(1+y^p) over [0, inf) minus its tail
        // beyond Y = w^{b}), with the tail expanded in powers of Y^{-p}.
        const double p = inv_b;
        const W Y = std::pow(w, 1.0 / p);
        const double full = (kPi / p) / std::sin(kPi / p);
        W tail = W(0.0);
        W Yp = std::pow(Y, 1.0 - p);
        const W step = std::pow(Y, -p);
        for (int k = 1; k <= 6; ++k) {
            tail += (k % 2 == 1 ? 1.0 : -1.0) * Yp / (k * p - 1.0);
            Yp *= step;
        }
        return (w / Y) * (full - tail);
    }
    auto f = [&](double s) -> W { return w / (W(1.0) + w * std::pow(s, inv_b)); };
    const auto spec = IntegrationSpec::finite(0.0, 1.0, 1e-12, 1e-300);
    if constexpr (std::is_same_v<W, double>) {
        return integrate(std::function<double(double)>(f), spec);
    } else {
        return integrate_complex(std::function<W(double)>(f), spec);
    }
}

// K(w) = integral over [0, 1] of x^{-beta} exp(j w x). Small w uses the
// substitution x = s^{1/(1-beta)}; large w rotates the contour onto the
// imaginary axis so that only a decaying integrand remains.
std::complex<double> oscillatory_power_integral(double w, double beta) {
    using cd = std::complex<double>;
    if (w <= 30.0) {
        const double p = 1.0 / (1.0 - beta);
        auto f = [&](double s) -> cd { return std::exp(cd(0.0, w * std::pow(s, p))); };
        return p * integrate_complex(f, IntegrationSpec::finite(0.0, 1.0, 1e-12, 1e-14));
    }
    const cd lead = std::polar(std::tgamma(1.0 - beta) * std::pow(w, beta - 1.0),
                               kPi * (1.0 - beta) / 2.0);
    auto g = [&](double y) -> cd { return std::pow(cd(1.0, y), -beta) * std::exp(-w * y); };
    const cd tail = integrate_complex(g, IntegrationSpec::semi_infinite(0.0, 1e-12, 1e-16));
    return lead - cd(0.0, 1.0) * std::exp(cd(0.0, w)) * tail;
}

std::complex<double> unit_modulus_charfn(double t, const NetworkConfig& cfg, double r0) {
    using cd = std::complex<double>;
    if (t < 0.0) return std::conj(unit_modulus_charfn(-t, cfg, r0));
    const double beta = 2.0 / cfg.eta;
    const double w = t * cfg.power * std::pow(r0, -cfg.eta);
    cd J;
    if (w < 1e-8) {
        J = cd(0.0, -w) / (1.0 - beta);
    } else {
        J = -(1.0 - std::exp(cd(0.0, w))) / beta -
            cd(0.0, w / beta) * oscillatory_power_integral(w, beta);
    }
    return std::exp(-(2.0 * kPi * cfg.lambda * r0 * r0 / cfg.eta) * J);
}

}  // namespace

void NetworkConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be > 0");
    if (!(power > 0.0) || !std::isfinite(power)) throw DomainError("power must be > 0");
    if (!(eta > 2.0) || !std::isfinite(eta)) throw DomainError("eta must be > 2");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw DomainError("noise must be >= 0");
}

NetworkConfig NetworkConfig::from_snr_db(double lambda_per_km2, double eta, double snr_db) {
    NetworkConfig c;
    c.lambda = units::per_km2_to_per_m2(lambda_per_km2);
    c.eta = eta;
    c.power = 1.0;
    c.noise = std::pow(units::kSnrReferenceMeters, -eta) / units::db_to_linear(snr_db);
    c.validate();
    return c;
}

NetworkConfig NetworkConfig::from_dbm(double lambda_per_km2, double eta, double power_dbm,
                                      double noise_dbm) {
    NetworkConfig c;
    c.lambda = units::per_km2_to_per_m2(lambda_per_km2);
    c.eta = eta;
    c.power = units::dbm_to_watts(power_dbm);
    c.noise = std::isinf(noise_dbm) && noise_dbm < 0 ? 0.0 : units::dbm_to_watts(noise_dbm);
    c.validate();
    return c;
}

LinkGeometry LinkGeometry::make(const NetworkConfig& cfg, double r0) {
    cfg.validate();
    if (!(r0 > 0.0) || !std::isfinite(r0)) throw DomainError("r0 must be > 0");
    LinkGeometry g;
    g.r0 = r0;
    const double rx = cfg.power * std::pow(r0, -cfg.eta);
    g.avg_snr = cfg.noise > 0.0 ? rx / cfg.noise : std::numeric_limits<double>::infinity();
    return g;
}

double GammaApprox::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (!std::isfinite(x)) return 1.0;
    return boost::math::gamma_p(q, x / theta);
}

ConstellationMoments ConstellationMoments::gaussian(int K) {
    ConstellationMoments m;
    double f = 1.0;
    for (int k = 1; k <= K; ++k) {
        f *= k;
        m.even.push_back(f);
    }
    return m;
}

ConstellationMoments ConstellationMoments::constant_modulus(int K) {
    ConstellationMoments m;
    m.even.assign(K, 1.0);
    return m;
}

double laplace_b_gaussian(double u, const NetworkConfig& cfg, double r0) {
    if (!(u >= 0.0)) throw DomainError("laplace_b_gaussian: u must be >= 0");
    if (u == 0.0) return 1.0;
    const double w = u * cfg.power * std::pow(r0, -cfg.eta);
    if (std::isinf(w)) return 0.0;
    const double pref = 2.0 * kPi * cfg.lambda * r0 * r0 / (cfg.eta - 2.0);
    return std::exp(-pref * weighted_2f1(w, cfg.eta));
}

std::complex<double> laplace_b_gaussian(std::complex<double> u, const NetworkConfig& cfg,
                                        double r0) {
    if (u.real() < 0.0) throw DomainError("laplace_b_gaussian: Re u must be >= 0");
    if (u == std::complex<double>(0.0)) return 1.0;
    const std::complex<double> w = u * (cfg.power * std::pow(r0, -cfg.eta));
    const double pref = 2.0 * kPi * cfg.lambda * r0 * r0 / (cfg.eta - 2.0);
    return std::exp(-pref * weighted_2f1(w, cfg.eta));
}

double laplace_b_eta4(double u, const NetworkConfig& cfg, double r0) {
    if (cfg.eta != 4.0) throw DomainError("laplace_b_eta4 requires eta = 4");
    if (!(u >= 0.0)) throw DomainError("laplace_b_eta4: u must be >= 0");
    const double up = u * cfg.power;
    return std::exp(-kPi * cfg.lambda * std::sqrt(up) * std::atan(std::sqrt(up) / (r0 * r0)));
}

SeriesValue laplace_b_series(double u, const NetworkConfig& cfg, double r0,
                             const ConstellationMoments& moments, int K, double tol) {
    if (!(u >= 0.0)) throw DomainError("laplace_b_series: u must be >= 0");
    if (K < 1 || static_cast<std::size_t>(K) > moments.even.size())
        throw DomainError("laplace_b_series: not enough constellation moments for K terms");
    const double w = u * cfg.power * std::pow(r0, -cfg.eta);
    const double pref = 2.0 * kPi * cfg.lambda * r0 * r0;
    double sum = 0.0;
    double wk = 1.0;
    double kfact = 1.0;
    double last = 0.0;
    for (int k = 1; k <= K; ++k) {
        wk *= w;
        kfact *= k;
        const double term = pref * wk * moments.even[k - 1] / ((cfg.eta * k - 2.0) * kfact);
        sum += (k % 2 == 0 ? term : -term);
        last = std::abs(term);
    }
    if (last > tol) throw ConvergenceError("laplace_b_series: truncation error too large", std::exp(sum), last);
    return SeriesValue{std::exp(sum), last};
}

BMoments b_moments(const NetworkConfig& cfg, double r0) {
    BMoments m;
    const double eta = cfg.eta;
    m.mean = 2.0 * kPi * cfg.lambda * std::pow(r0, 2.0 - eta) * cfg.power / (eta - 2.0);
    const double var = kPi * cfg.lambda * std::pow(r0, 2.0 - 2.0 * eta) * cfg.power * cfg.power /
                       (eta - 1.0);
    m.second_moment = var + m.mean * m.mean;
    return m;
}

GammaApprox gamma_fit(const NetworkConfig& cfg, double r0) {
    if (!(cfg.eta > 2.0)) throw DomainError("gamma_fit requires eta > 2");
    const double eta = cfg.eta;
    GammaApprox g;
    g.q = 4.0 * kPi * cfg.lambda * r0 * r0 * (eta - 1.0) / ((eta - 2.0) * (eta - 2.0));
    g.theta = (eta - 2.0) * cfg.power / (2.0 * (eta - 1.0) * std::pow(r0, eta));
    return g;
}

std::complex<double> interference_charfn(double t, const NetworkConfig& cfg, double r0,
                                         InterferenceModel model) {
    if (model == InterferenceModel::unit_modulus) return unit_modulus_charfn(t, cfg, r0);
    if (t < 0.0) return std::conj(interference_charfn(-t, cfg, r0, model));
    return laplace_b_gaussian(std::complex<double>(0.0, -t), cfg, r0);
}

namespace {

using CharfnCache = std::unordered_map<double, std::complex<double>>;

double interference_cdf_impl(double x, const NetworkConfig& cfg, double r0, CdfMethod method,
                             InterferenceModel model, CharfnCache* cache) {
    if (!(x > 0.0)) {
        if (x == 0.0) return 0.0;
        throw DomainError("interference_cdf: x must be > 0");
    }
    if (std::isinf(x)) return 1.0;
    if (method == CdfMethod::gamma) return gamma_fit(cfg, r0).cdf(x);
    // Work with B / E{B} so the inversion runs on an O(1) scale.
    const double scale = b_moments(cfg, r0).mean;
    // Chernoff bound at s = r0^eta / (2P), where E{e^{sB}} <= e^{2 s E{B}} for
    // both symbol models; far in the tail the CDF is 1 to double precision.
    const double s = 0.5 * std::pow(r0, cfg.eta) / cfg.power;
    const double log_tail = -s * (x - 2.0 * scale);
    if (log_tail < -36.0) return 1.0 - std::exp(log_tail);
    auto charfn = [&](double t) {
        if (!cache) return interference_charfn(t / scale, cfg, r0, model);
        auto it = cache->find(t);
        if (it != cache->end()) return it->second;
        const auto v = interference_charfn(t / scale, cfg, r0, model);
        cache->emplace(t, v);
        return v;
    };
    return gil_pelaez_cdf(charfn, x / scale, default_gil_pelaez_spec());
}

}  // namespace

double interference_cdf(double x, const NetworkConfig& cfg, double r0, CdfMethod method,
                        InterferenceModel model) {
    return interference_cdf_impl(x, cfg, r0, method, model, nullptr);
}

std::vector<double> interference_cdf(const std::vector<double>& xs, const NetworkConfig& cfg, double r0,
                                     CdfMethod method, InterferenceModel model) {
    CharfnCache cache;
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(interference_cdf_impl(x, cfg, r0, method, model, &cache));
    return out;
}

double sinr_pdf_gamma(double v, const NetworkConfig& cfg, double r0) {
    if (v < 0.0) return 0.0;
    const GammaApprox g = gamma_fit(cfg, r0);
    const double rx = cfg.power * std::pow(r0, -cfg.eta);
    const double c = g.theta / rx;
    const double base = 1.0 + c * v;
    return std::exp(-v * cfg.noise / rx - (g.q + 1.0) * std::log1p(c * v)) / rx *
           (base * cfg.noise + g.q * g.theta);
}

double sinr_ccdf_gamma(double v, const NetworkConfig& cfg, double r0) {
    if (v <= 0.0) return 1.0;
    const GammaApprox g = gamma_fit(cfg, r0);
    const double rx = cfg.power * std::pow(r0, -cfg.eta);
    const double c = g.theta / rx;
    return std::exp(-v * cfg.noise / rx - g.q * std::log1p(c * v));
}

double sinr_ccdf_exact(double v, const NetworkConfig& cfg, double r0) {
    if (v <= 0.0) return 1.0;
    const double rx = cfg.power * std::pow(r0, -cfg.eta);
    const double noise_factor = std::exp(-v * cfg.noise / rx);
    if (noise_factor == 0.0) return 0.0;
    return noise_factor * laplace_b_gaussian(v / rx, cfg, r0);
}

ServingDistance::ServingDistance(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0)) throw DomainError("ServingDistance: lambda must be > 0");
}

double ServingDistance::pdf(double r) const {
    if (r < 0.0) return 0.0;
    return 2.0 * kPi * lambda_ * r * std::exp(-kPi * lambda_ * r * r);
}

double ServingDistance::cdf(double r) const {
    if (r <= 0.0) return 0.0;
    return -std::expm1(-kPi * lambda_ * r * r);
}

double ServingDistance::quantile(double p) const {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("ServingDistance::quantile: p must lie in [0, 1)");
    return std::sqrt(-std::log1p(-p) / (kPi * lambda_));
}

double ServingDistance::mode() const { return 1.0 / std::sqrt(2.0 * kPi * lambda_); }

}  // namespace fbr
