#include "fbr/constellation_rate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <set>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

namespace fbr {

namespace {

constexpr double kPi = std::numbers::pi;

// PAM amplitude and bits for one dimension with L = 2^k levels.
struct Pam {
    std::vector<double> amp;
    std::vector<unsigned> label;  // k-bit label per amplitude, MSB first
};

Pam make_pam(int levels, Labeling labeling) {
    Pam p;
    for (int i = 0; i < levels; ++i) {
        // amplitudes from the top: +(L-1), ..., -(L-1)
        p.amp.push_back(static_cast<double>(levels - 1 - 2 * i));
        unsigned lab = 0;
        if (labeling == Labeling::gray) {
            lab = static_cast<unsigned>(i ^ (i >> 1));
        } else {
            // natural binary, bit order reversed so the LSB of the index is sent first
            const int k = static_cast<int>(std::log2(levels));
            const unsigned idx = static_cast<unsigned>(levels - 1 - i);  // ascending amplitude
            for (int b = 0; b < k; ++b)
                if (idx & (1u << b)) lab |= 1u << (k - 1 - b);
        }
        p.label.push_back(lab);
    }
    return p;
}

// Interleave I and Q label bits MSB first: I0 Q0 I1 Q1 ...
unsigned interleave(unsigned li, int ki, unsigned lq, int kq) {
    unsigned out = 0;
    int total = ki + kq;
    int pos = total - 1;
    for (int b = 0; b < std::max(ki, kq); ++b) {
        if (b < ki) {
            if ((li >> (ki - 1 - b)) & 1u) out |= 1u << pos;
            --pos;
        }
        if (b < kq) {
            if ((lq >> (kq - 1 - b)) & 1u) out |= 1u << pos;
            --pos;
        }
    }
    return out;
}

}  // namespace

int Constellation::bits() const { return static_cast<int>(std::lround(std::log2(M))); }

int Constellation::index_of_label(unsigned label) const {
    if (label >= by_label_.size()) throw DomainError("label out of range");
    return by_label_[label];
}

int Constellation::level_bit(int m, int level) const {
    return static_cast<int>((labels[m] >> (bits() - 1 - level)) & 1u);
}

void Constellation::validate() const {
    if (M < 2 || (M & (M - 1)) != 0) throw DomainError("constellation order must be a power of 2");
    if (static_cast<int>(symbols.size()) != M || static_cast<int>(labels.size()) != M)
        throw DomainError("constellation size mismatch");
    double p = 0.0;
    for (const auto& s : symbols) p += std::norm(s);
    if (std::abs(p / M - 1.0) > 1e-12) throw DomainError("constellation is not unit power");
    std::set<unsigned> seen(labels.begin(), labels.end());
    if (static_cast<int>(seen.size()) != M || *seen.rbegin() >= static_cast<unsigned>(M))
        throw DomainError("labels are not a bijection");
}

Constellation make_qam(int M, Labeling labeling) {
    int ki = 0;
    int kq = 0;
    switch (M) {
        case 2: ki = 1; kq = 0; break;
        case 4: ki = 1; kq = 1; break;
        case 8: ki = 2; kq = 1; break;
        case 16: ki = 2; kq = 2; break;
        default: throw DomainError("unsupported QAM order " + std::to_string(M));
    }
    const Pam pi = make_pam(1 << ki, labeling);
    const Pam pq = kq > 0 ? make_pam(1 << kq, labeling) : Pam{{0.0}, {0u}};
    Constellation c;
    c.M = M;
    c.labeling = labeling;
    c.name = std::to_string(M) + "-QAM";
    double power = 0.0;
    for (std::size_t a = 0; a < pi.amp.size(); ++a)
        for (std::size_t b = 0; b < pq.amp.size(); ++b) {
            c.symbols.emplace_back(pi.amp[a], pq.amp[b]);
            c.labels.push_back(interleave(pi.label[a], ki, pq.label[b], kq));
            power += pi.amp[a] * pi.amp[a] + pq.amp[b] * pq.amp[b];
        }
    const double scale = 1.0 / std::sqrt(power / M);
    for (auto& s : c.symbols) s *= scale;
    c.by_label_.assign(M, -1);
    for (int m = 0; m < M; ++m) c.by_label_[c.labels[m]] = m;
    c.validate();
    return c;
}

CondRatePair cond_rate(const Constellation& c, double v, int order) {
    if (!(v >= 0.0)) throw DomainError("cond_rate: SNR must be >= 0");
    const double log2m = std::log2(static_cast<double>(c.M));
    if (v == 0.0) return CondRatePair{0.0, 0.0};
    const Hermite2DRule& rule = Hermite2DRule::cached(order);
    const double sv = std::sqrt(v);
    const int M = c.M;
    std::vector<double> ex(M);
    double mi_acc = 0.0;
    double disp_acc = 0.0;
    for (int m = 0; m < M; ++m) {
        std::vector<double> dr(M), di(M), dd(M);
        for (int l = 0; l < M; ++l) {
            const auto d = c.symbols[m] - c.symbols[l];
            dr[l] = d.real();
            di[l] = d.imag();
            dd[l] = v * std::norm(d);
        }
        double e1 = 0.0;
        double e2 = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double t1 = rule.nodes[k][0];
            const double t2 = rule.nodes[k][1];
            double mx = -std::numeric_limits<double>::infinity();
            for (int l = 0; l < M; ++l) {
                ex[l] = -2.0 * sv * (t1 * dr[l] + t2 * di[l]) - dd[l];
                mx = std::max(mx, ex[l]);
            }
            double s = 0.0;
            for (int l = 0; l < M; ++l) s += std::exp(ex[l] - mx);
            const double g = (mx + std::log(s)) / std::numbers::ln2;
            e1 += rule.weights[k] * g;
            e2 += rule.weights[k] * g * g;
        }
        e1 /= kPi;
        e2 /= kPi;
        mi_acc += e1;
        disp_acc += std::max(e2 - e1 * e1, 0.0);
    }
    CondRatePair out;
    out.mi = std::clamp(log2m - mi_acc / M, 0.0, log2m);
    out.disp = disp_acc / M;
    return out;
}

double cond_mi(const Constellation& c, double v, int order) { return cond_rate(c, v, order).mi; }

namespace {

bool split_grid(const Constellation& c, std::vector<double>& re, std::vector<double>& im) {
    std::set<double> a;
    std::set<double> b;
    for (const auto& s : c.symbols) {
        a.insert(s.real());
        b.insert(s.imag());
    }
    if (a.size() * b.size() != static_cast<std::size_t>(c.M)) return false;
    std::set<std::pair<double, double>> pts;
    for (const auto& s : c.symbols) pts.insert({s.real(), s.imag()});
    for (double x : a)
        for (double y : b)
            if (!pts.count({x, y})) return false;
    re.assign(a.begin(), a.end());
    im.assign(b.begin(), b.end());
    return true;
}

// One real dimension with amplitudes `amp` at SNR v and noise density
// exp(-t^2)/sqrt(pi). Returns (sum_m E g_m, sum_m Var g_m) over the L points.
std::pair<double, double> pam_terms(const std::vector<double>& amp, double v) {
    const std::size_t L = amp.size();
    if (L < 2) return {0.0, 0.0};
    const double sv = std::sqrt(v);
    double mean_sum = 0.0;
    double var_sum = 0.0;
    for (std::size_t m = 0; m < L; ++m) {
        auto g = [&](double t) {
            double mx = -std::numeric_limits<double>::infinity();
            double ex[64];
            for (std::size_t l = 0; l < L; ++l) {
                const double d = amp[m] - amp[l];
                ex[l] = -2.0 * sv * t * d - v * d * d;
                mx = std::max(mx, ex[l]);
            }
            double s = 0.0;
            for (std::size_t l = 0; l < L; ++l) s += std::exp(ex[l] - mx);
            return (mx + std::log(s)) / std::numbers::ln2;
        };
        auto moment = [&](int k) {
            auto f = [&](double t) {
                const double w = std::exp(-t * t) / std::sqrt(kPi);
                if (w == 0.0) return 0.0;
                const double gv = g(t);
                return w * (k == 1 ? gv : gv * gv);
            };
            auto neg = [&](double t) { return f(-t); };
            const auto spec = IntegrationSpec::semi_infinite(0.0, 1e-12, 1e-15);
            return integrate(f, spec) + integrate(neg, spec);
        };
        const double e1 = moment(1);
        const double e2 = moment(2);
        mean_sum += e1;
        var_sum += std::max(e2 - e1 * e1, 0.0);
    }
    return {mean_sum, var_sum};
}

}  // namespace

bool is_product_grid(const Constellation& c) {
    std::vector<double> a, b;
    return split_grid(c, a, b);
}

CondRatePair cond_rate_separable(const Constellation& c, double v) {
    if (!(v >= 0.0)) throw DomainError("cond_rate_separable: SNR must be >= 0");
    std::vector<double> re, im;
    if (!split_grid(c, re, im)) throw DomainError("constellation is not a product grid");
    if (v == 0.0) return CondRatePair{0.0, 0.0};
    CondRatePair out;
    for (const auto* amp : {&re, &im}) {
        const std::size_t L = amp->size();
        if (L < 2) continue;
        const auto [mean_sum, var_sum] = pam_terms(*amp, v);
        out.mi += std::log2(static_cast<double>(L)) - mean_sum / L;
        out.disp += var_sum / L;
    }
    out.mi = std::clamp(out.mi, 0.0, std::log2(static_cast<double>(c.M)));
    return out;
}

double cond_dispersion(const Constellation& c, double v, int order) {
    return cond_rate(c, v, order).disp;
}

struct CondRateTable::Impl {
    boost::math::interpolators::cardinal_cubic_b_spline<double> mi;
    boost::math::interpolators::cardinal_cubic_b_spline<double> sd;
};

CondRateTable::CondRateTable(const Constellation& c) {
    log2m_ = std::log2(static_cast<double>(c.M));
    constexpr int kPerDecade = 64;
    const double x0 = std::log10(v_lo_);
    const double x1 = std::log10(v_hi_);
    const int n = static_cast<int>(std::lround((x1 - x0) * kPerDecade)) + 1;
    const double h = (x1 - x0) / (n - 1);
    std::vector<double> mi(n), sd(n);
    const bool separable = is_product_grid(c);
    for (int i = 0; i < n; ++i) {
        const double v = std::pow(10.0, x0 + i * h);
        const CondRatePair p = separable ? cond_rate_separable(c, v) : cond_rate(c, v);
        mi[i] = p.mi;
        sd[i] = std::sqrt(p.disp);
    }
    mi_lo_ = mi.front();
    sd_lo_ = sd.front();
    auto impl = std::make_shared<Impl>(Impl{
        boost::math::interpolators::cardinal_cubic_b_spline<double>(mi.begin(), mi.end(), x0, h),
        boost::math::interpolators::cardinal_cubic_b_spline<double>(sd.begin(), sd.end(), x0, h)});
    impl_ = impl;
}

const CondRateTable& CondRateTable::get(const Constellation& c) {
    static std::mutex mutex;
    static std::map<std::string, std::unique_ptr<CondRateTable>> cache;
    std::string key = c.name;
    for (const auto& s : c.symbols) key += "|" + std::to_string(s.real()) + "," + std::to_string(s.imag());
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[key];
    if (!slot) slot.reset(new CondRateTable(c));
    return *slot;
}

double CondRateTable::mi(double v) const {
    if (v <= 0.0) return 0.0;
    if (v < v_lo_) return mi_lo_ * v / v_lo_;
    if (v >= v_hi_) return log2m_;
    return std::clamp(impl_->mi(std::log10(v)), 0.0, log2m_);
}

double CondRateTable::sqrt_disp(double v) const {
    if (v <= 0.0) return 0.0;
    if (v < v_lo_) return sd_lo_ * std::sqrt(v / v_lo_);
    if (v >= v_hi_) return 0.0;
    return std::max(impl_->sd(std::log10(v)), 0.0);
}

RateResult qam_fbr_rate(const Constellation& c, double v, const CodingConfig& coding) {
    const CondRateTable& t = CondRateTable::get(c);
    return RateResult::compose(t.mi(v), t.sqrt_disp(v), coding);
}

namespace {

// Integral of h(v) f(v) over the SINR law given r0, with f the Gamma-approximate
// density; above the table range h is replaced by `h_inf` times the tail mass.
double gamma_average(const std::function<double(double)>& h, double h_inf, double v_hi,
                     const LinkGeometry& geom, const NetworkConfig& cfg) {
    auto f = [&](double v) { return h(v) * sinr_pdf_gamma(v, cfg, geom.r0); };
    double top = v_hi;
    if (std::isfinite(geom.avg_snr)) top = std::min(top, geom.avg_snr * std::log(1e16));
    std::vector<double> cuts{0.0};
    for (double e = 1e-4; e < top; e *= 10.0) cuts.push_back(e);
    if (std::isfinite(geom.avg_snr) && geom.avg_snr < top) cuts.push_back(geom.avg_snr);
    cuts.push_back(top);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += integrate(f, IntegrationSpec::finite(cuts[i], cuts[i + 1], 1e-9, 1e-14));
    if (h_inf != 0.0 && top == v_hi) total += h_inf * sinr_ccdf_gamma(v_hi, cfg, geom.r0);
    return total;
}

}  // namespace

double qam_capacity_fixed_r0(const Constellation& c, const LinkGeometry& geom,
                             const NetworkConfig& cfg) {
    const CondRateTable& t = CondRateTable::get(c);
    return gamma_average([&](double v) { return t.mi(v); }, t.max_rate(), t.v_max(), geom, cfg);
}

double qam_sqrt_dispersion_fixed_r0(const Constellation& c, const LinkGeometry& geom,
                                    const NetworkConfig& cfg) {
    const CondRateTable& t = CondRateTable::get(c);
    return gamma_average([&](double v) { return t.sqrt_disp(v); }, 0.0, t.v_max(), geom, cfg);
}

RateResult avg_rate_qam_fixed_r0(const Constellation& c, const LinkGeometry& geom,
                                 const NetworkConfig& cfg, const CodingConfig& coding) {
    coding.validate();
    return RateResult::compose(qam_capacity_fixed_r0(c, geom, cfg),
                               qam_sqrt_dispersion_fixed_r0(c, geom, cfg), coding);
}

RateResult avg_rate_qam_spatial(const Constellation& c, const NetworkConfig& cfg,
                                const CodingConfig& coding) {
    coding.validate();
    cfg.validate();
    const ServingDistance law(cfg.lambda);
    auto outer = [&](auto term) {
        auto f = [&](double r) { return law.pdf(r) * term(LinkGeometry::make(cfg, r)); };
        return integrate(f, IntegrationSpec::finite(0.0, law.truncation(), 1e-8, 1e-11));
    };
    const double cap = outer([&](const LinkGeometry& g) { return qam_capacity_fixed_r0(c, g, cfg); });
    const double sd =
        outer([&](const LinkGeometry& g) { return qam_sqrt_dispersion_fixed_r0(c, g, cfg); });
    return RateResult::compose(cap, sd, coding);
}

}  // namespace fbr
