#include "fbr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace fbr {

namespace {

// Kronrod 21-point abscissae (positive half) and weights, with the embedded
// 10-point Gauss weights for the odd-indexed abscissae.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600161251946, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();

template <typename T>
struct Panel {
    double a;
    double b;
    T value;
    double error;
    double abs_value;  // integral of |f|, for the roundoff floor
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <typename T, typename F>
Panel<T> gk21(const F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const T fc = f(center);
    T resk = fc * kWgk[10];
    T resg = T{};
    double resabs = std::abs(fc) * kWgk[10];
    std::array<T, 10> f1{};
    std::array<T, 10> f2{};
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        resk += (f1[j] + f2[j]) * kWgk[j];
        resabs += (std::abs(f1[j]) + std::abs(f2[j])) * kWgk[j];
        if (j % 2 == 1) resg += (f1[j] + f2[j]) * kWg[j / 2];
    }
    const T mean = resk * 0.5;
    double resasc = std::abs(fc - mean) * kWgk[10];
    for (int j = 0; j < 10; ++j)
        resasc += (std::abs(f1[j] - mean) + std::abs(f2[j] - mean)) * kWgk[j];

    const double ahalf = std::abs(half);
    double err = std::abs((resk - resg) * half);
    resasc *= ahalf;
    resabs *= ahalf;
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps))
        err = std::max(50.0 * kEps * resabs, err);
    return Panel<T>{a, b, resk * half, err, resabs};
}

template <typename T, typename F>
QuadratureResult<T> adaptive(const F& f, double a, double b, double rel_tol, double abs_tol,
                             int max_subdivisions) {
    std::priority_queue<Panel<T>> heap;
    Panel<T> first = gk21<T>(f, a, b);
    T total = first.value;
    double total_err = first.error;
    heap.push(first);
    int evals = 21;
    int subdivisions = 0;
    std::vector<Panel<T>> retired;  // too narrow to split further
    double retired_err = 0.0;

    auto target = [&]() { return std::max(abs_tol, rel_tol * std::abs(total)); };

    while (total_err > target()) {
        if (heap.empty() || retired_err > target()) break;
        if (subdivisions >= max_subdivisions) {
            throw ConvergenceError("adaptive quadrature: subdivision limit reached",
                                   std::real(total), total_err);
        }
        Panel<T> worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) ||
            std::abs(worst.b - worst.a) < 64.0 * kEps * std::abs(mid)) {
            retired_err += worst.error;
            retired.push_back(worst);
            continue;
        }
        Panel<T> left = gk21<T>(f, worst.a, mid);
        Panel<T> right = gk21<T>(f, mid, worst.b);
        evals += 42;
        ++subdivisions;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed drift from the incremental updates.
    T sum{};
    double err = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    for (const auto& p : retired) {
        sum += p.value;
        err += p.error;
    }
    if (err > std::max(abs_tol, rel_tol * std::abs(sum)) * 1.0001 && !retired.empty()) {
        throw ConvergenceError("adaptive quadrature: roundoff limits accuracy", std::real(sum), err);
    }
    return QuadratureResult<T>{sum, err, evals, subdivisions};
}

template <typename T, typename F>
QuadratureResult<T> integrate_impl(const F& f, const IntegrationSpec& spec) {
    spec.validate();
    if (spec.kind == IntegrationSpec::Interval::finite) {
        return adaptive<T>(f, spec.lower, spec.upper, spec.rel_tol, spec.abs_tol,
                           spec.max_subdivisions);
    }
    const double a = spec.lower;
    auto mapped = [&](double t) -> T {
        const double s = 1.0 - t;
        const double x = a + t / s;
        const T v = f(x);
        return v * (1.0 / (s * s));
    };
    return adaptive<T>(mapped, 0.0, 1.0, spec.rel_tol, spec.abs_tol, spec.max_subdivisions);
}

template <typename Z>
Z euler_2f1(double a, double b, double c, Z z) {
    // t in [0, 1/2]: t = s^(1/b) removes t^(b-1).
    // t in [1/2, 1]: 1 - t = w^(1/(c-b)) removes (1-t)^(c-b-1).
    const double cb = c - b;
    auto lower_part = [&](double s) -> Z {
        const double t = std::pow(s, 1.0 / b);
        return std::pow(1.0 - t, cb - 1.0) * std::pow(Z(1.0) - z * t, -a) / b;
    };
    auto upper_part = [&](double w) -> Z {
        const double t = 1.0 - std::pow(w, 1.0 / cb);
        return std::pow(t, b - 1.0) * std::pow(Z(1.0) - z * t, -a) / cb;
    };
    IntegrationSpec lo = IntegrationSpec::finite(0.0, std::pow(0.5, b), 1e-13, 1e-300);
    IntegrationSpec hi = IntegrationSpec::finite(0.0, std::pow(0.5, cb), 1e-13, 1e-300);
    Z sum;
    if constexpr (std::is_same_v<Z, double>) {
        sum = integrate_detailed(std::function<double(double)>(lower_part), lo).value +
              integrate_detailed(std::function<double(double)>(upper_part), hi).value;
    } else {
        sum = integrate_complex_detailed(std::function<Z(double)>(lower_part), lo).value +
              integrate_complex_detailed(std::function<Z(double)>(upper_part), hi).value;
    }
    const double log_pref = std::lgamma(c) - std::lgamma(b) - std::lgamma(cb);
    return sum * std::exp(log_pref);
}

}  // namespace

void IntegrationSpec::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("integration tolerances must be > 0");
    if (max_subdivisions < 1) throw DomainError("integration needs at least one subdivision");
    if (!std::isfinite(lower)) throw DomainError("integration lower limit must be finite");
    if (kind == Interval::finite && !(lower < upper))
        throw DomainError("finite integration interval requires lower < upper");
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inverse(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("q_inverse: p must lie in (0, 1)");
    double x = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    // Newton refinement against our own q_function keeps the pair consistent.
    for (int i = 0; i < 2; ++i) {
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        if (pdf == 0.0) break;
        x += (q_function(x) - p) / pdf;
    }
    return x;
}

double erfcx(double x) {
    if (x < 20.0) return std::exp(x * x) * std::erfc(x);
    // Asymptotic series; relative error below 1e-12 for x >= 20.
    const double inv2 = 1.0 / (2.0 * x * x);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 8; ++k) {
        term *= -(2.0 * k - 1.0) * inv2;
        sum += term;
    }
    return sum / (x * std::sqrt(std::numbers::pi));
}

double gauss_2f1_nonpos(double a, double b, double c, double z) {
    if (!(b > 0.0) || !(c > b)) throw DomainError("gauss_2f1_nonpos requires c > b > 0");
    if (!(z <= 0.0) || !std::isfinite(z)) throw DomainError("gauss_2f1_nonpos requires finite z <= 0");
    if (z == 0.0) return 1.0;
    return euler_2f1<double>(a, b, c, z);
}

std::complex<double> gauss_2f1_euler(double a, double b, double c, std::complex<double> z) {
    if (!(b > 0.0) || !(c > b)) throw DomainError("gauss_2f1_euler requires c > b > 0");
    if (z.imag() == 0.0 && z.real() >= 1.0) throw DomainError("gauss_2f1_euler: z on the branch cut");
    if (z == std::complex<double>(0.0)) return 1.0;
    return euler_2f1<std::complex<double>>(a, b, c, z);
}

double gauss_2f1_series(double a, double b, double c, double z, int terms) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k < terms; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

double reg_inc_beta(double z, double x, double y) {
    if (!(z >= 0.0 && z <= 1.0)) throw DomainError("reg_inc_beta: z must lie in [0, 1]");
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("reg_inc_beta: shape parameters must be > 0");
    return boost::math::ibeta(x, y, z);
}

QuadratureResult<double> integrate_detailed(const std::function<double(double)>& f,
                                            const IntegrationSpec& spec) {
    return integrate_impl<double>(f, spec);
}

QuadratureResult<std::complex<double>> integrate_complex_detailed(
    const std::function<std::complex<double>(double)>& f, const IntegrationSpec& spec) {
    return integrate_impl<std::complex<double>>(f, spec);
}

double integrate(const std::function<double(double)>& f, const IntegrationSpec& spec) {
    return integrate_impl<double>(f, spec).value;
}

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       const IntegrationSpec& spec) {
    return integrate_impl<std::complex<double>>(f, spec).value;
}

HermiteRule HermiteRule::make(int order) {
    if (order < 1) throw DomainError("Hermite rule order must be >= 1");
    const int n = order;
    const double pim4 = 0.7511255444649425;  // pi^(-1/4)
    HermiteRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    double z = 0.0;
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(double(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * rule.nodes[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * rule.nodes[1];
        else
            z = 2.0 * z - rule.nodes[i - 2];
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(double(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / (pp * pp);
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

Hermite2DRule Hermite2DRule::make(int order) {
    const HermiteRule r = HermiteRule::make(order);
    Hermite2DRule rule;
    rule.order = order;
    rule.nodes.reserve(std::size_t(order) * order);
    rule.weights.reserve(std::size_t(order) * order);
    for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j) {
            rule.nodes.push_back({r.nodes[i], r.nodes[j]});
            rule.weights.push_back(r.weights[i] * r.weights[j]);
        }
    return rule;
}

const Hermite2DRule& Hermite2DRule::cached(int order) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<Hermite2DRule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<Hermite2DRule>(make(order));
    return *slot;
}

double integrate_hermite2d(const std::function<double(double, double)>& g,
                           const Hermite2DRule& rule) {
    // Pairwise-free but ordered summation keeps results independent of threads.
    double sum = 0.0;
    double comp = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double term = rule.weights[i] * g(rule.nodes[i][0], rule.nodes[i][1]) - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    return sum;
}

IntegrationSpec default_gil_pelaez_spec() {
    IntegrationSpec s = IntegrationSpec::finite(1e-6, 1.0, 1e-8, 1e-7);
    s.max_subdivisions = 200000;
    return s;
}

GilPelaezResult gil_pelaez(const std::function<std::complex<double>(double)>& charfn, double x,
                           const IntegrationSpec& spec) {
    spec.validate();
    const double t_min = spec.lower > 0.0 ? spec.lower : 1e-6;
    double t_hi = spec.kind == IntegrationSpec::Interval::finite ? spec.upper : 1.0;
    if (!(t_hi > t_min)) t_hi = 2.0 * t_min;

    auto integrand = [&](double t) {
        const std::complex<double> rot = std::polar(1.0, -t * x);
        return std::imag(rot * charfn(t)) / t;
    };

    // [0, t_min]: the integrand tends to a finite limit at 0.
    double total = integrand(t_min) * t_min;
    double err = 0.0;
    int budget = spec.max_subdivisions;
    double t_lo = t_min;
    const double panel_abs = spec.abs_tol * 0.25;
    for (;;) {
        IntegrationSpec ps = IntegrationSpec::finite(t_lo, t_hi, spec.rel_tol, panel_abs);
        ps.max_subdivisions = budget;
        const auto r = integrate_impl<double>(integrand, ps);
        budget -= r.subdivisions + 1;
        total += r.value;
        err += r.error;
        const double tail = std::abs(charfn(t_hi)) / t_hi;
        if (std::abs(r.value) < spec.abs_tol && tail < spec.abs_tol) break;
        if (budget <= 0) {
            throw ConvergenceError("gil_pelaez: truncation criterion not met",
                                   0.5 - total / std::numbers::pi, err);
        }
        t_lo = t_hi;
        t_hi *= 2.0;
    }
    GilPelaezResult out;
    out.raw = 0.5 - total / std::numbers::pi;
    out.value = std::clamp(out.raw, 0.0, 1.0);
    out.error = err / std::numbers::pi;
    out.truncation = t_hi;
    return out;
}

double gil_pelaez_cdf(const std::function<std::complex<double>(double)>& charfn, double x,
                      const IntegrationSpec& spec) {
    return gil_pelaez(charfn, x, spec).value;
}

}  // namespace fbr
