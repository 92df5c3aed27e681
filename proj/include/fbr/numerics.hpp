#pragma once

#include <array>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbr {

/// Raised when an argument lies outside a function's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an iterative numerical procedure fails to reach its tolerance.
/// Carries the best estimate seen and the achieved error bound so callers can
/// decide whether the partial answer is usable.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

struct IntegrationSpec {
    enum class Interval { finite, semi_infinite };

    Interval kind = Interval::finite;
    double lower = 0.0;
    double upper = 1.0;  // ignored for semi_infinite
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_subdivisions = 4000;

    static IntegrationSpec finite(double a, double b, double rel = 1e-10, double abs = 1e-12) {
        IntegrationSpec s;
        s.kind = Interval::finite;
        s.lower = a;
        s.upper = b;
        s.rel_tol = rel;
        s.abs_tol = abs;
        return s;
    }

    static IntegrationSpec semi_infinite(double a, double rel = 1e-10, double abs = 1e-12) {
        IntegrationSpec s;
        s.kind = Interval::semi_infinite;
        s.lower = a;
        s.rel_tol = rel;
        s.abs_tol = abs;
        return s;
    }

    IntegrationSpec with_tolerances(double rel, double abs) const {
        IntegrationSpec s = *this;
        s.rel_tol = rel;
        s.abs_tol = abs;
        return s;
    }

    void validate() const;
};

template <typename T>
struct QuadratureResult {
    T value{};
    double error = 0.0;
    int evaluations = 0;
    int subdivisions = 0;
};

/// Upper tail of the standard normal distribution.
double q_function(double x);

/// Inverse of q_function on (0, 1).
double q_inverse(double p);

/// exp(x^2) * erfc(x), stable for large positive x.
double erfcx(double x);

/// Gauss hypergeometric function 2F1(a, b; c; z) for z <= 0, c > b > 0,
/// evaluated from the Euler integral representation.
double gauss_2f1_nonpos(double a, double b, double c, double z);

/// Same Euler integral evaluated at complex z off the cut [1, inf).
std::complex<double> gauss_2f1_euler(double a, double b, double c, std::complex<double> z);

/// Truncated power series of 2F1; only meaningful for |z| < 1.
double gauss_2f1_series(double a, double b, double c, double z, int terms = 200);

/// Regularized incomplete beta function I_z(x, y).
double reg_inc_beta(double z, double x, double y);

/// Adaptive Gauss-Kronrod (10/21) integration. Semi-infinite intervals are
/// mapped onto [0, 1) with x = a + t / (1 - t). Throws ConvergenceError when
/// the subdivision budget runs out before the tolerance is met.
QuadratureResult<double> integrate_detailed(const std::function<double(double)>& f,
                                            const IntegrationSpec& spec);
QuadratureResult<std::complex<double>> integrate_complex_detailed(
    const std::function<std::complex<double>(double)>& f, const IntegrationSpec& spec);

double integrate(const std::function<double(double)>& f, const IntegrationSpec& spec);
std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       const IntegrationSpec& spec);

/// One-dimensional Gauss-Hermite rule for the weight exp(-x^2).
struct HermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    static HermiteRule make(int order);
};

/// Tensor-product Gauss-Hermite rule for the weight exp(-|t|^2) on R^2.
struct Hermite2DRule {
    int order = 0;
    std::vector<std::array<double, 2>> nodes;
    std::vector<double> weights;

    static Hermite2DRule make(int order);
    /// Cached rule of the given order; thread-safe.
    static const Hermite2DRule& cached(int order);
};

inline constexpr int kDefaultHermiteOrder = 48;

double integrate_hermite2d(const std::function<double(double, double)>& g,
                           const Hermite2DRule& rule);

struct GilPelaezResult {
    double raw = 0.0;      // before clamping to [0, 1]
    double value = 0.0;    // clamped
    double error = 0.0;
    double truncation = 0.0;  // upper limit reached
};

/// CDF at x of the distribution with characteristic function `charfn`, by
/// Gil-Pelaez inversion. Integration starts at spec.lower (t_min, default
/// 1e-6) and, for a finite spec, uses spec.upper as the first panel end; the
/// range is then doubled until both the last panel and |charfn(T)| / T drop
/// below spec.abs_tol.
GilPelaezResult gil_pelaez(const std::function<std::complex<double>(double)>& charfn, double x,
                           const IntegrationSpec& spec);

double gil_pelaez_cdf(const std::function<std::complex<double>(double)>& charfn, double x,
                      const IntegrationSpec& spec);

IntegrationSpec default_gil_pelaez_spec();

}  // namespace fbr
