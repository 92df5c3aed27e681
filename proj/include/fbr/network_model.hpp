#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace fbr {

/// Downlink Poisson network parameters, SI units throughout.
struct NetworkConfig {
    double lambda = 1e-6;  // BS per m^2
    double power = 1.0;    // W
    double eta = 4.0;
    double noise = 0.0;    // W; zero means interference limited

    void validate() const;
    bool interference_limited() const { return noise == 0.0; }

    /// Transmit SNR `snr_db` measured at the 1 km reference distance,
    /// with unit transmit power.
    static NetworkConfig from_snr_db(double lambda_per_km2, double eta, double snr_db);
    /// Absolute powers in dBm.
    static NetworkConfig from_dbm(double lambda_per_km2, double eta, double power_dbm,
                                  double noise_dbm);
};

struct LinkGeometry {
    double r0 = 0.0;
    double avg_snr = 0.0;  // +inf when noise is zero

    static LinkGeometry make(const NetworkConfig& cfg, double r0);
};

struct GammaApprox {
    double q = 0.0;
    double theta = 0.0;

    double mean() const { return q * theta; }
    double cdf(double x) const;
};

struct ConstellationMoments {
    std::vector<double> even;  // even[k-1] = E|s|^{2k}

    static ConstellationMoments gaussian(int K);
    static ConstellationMoments constant_modulus(int K);
};

struct BMoments {
    double mean = 0.0;
    double second_moment = 0.0;

    double variance() const { return second_moment - mean * mean; }
};

struct SeriesValue {
    double value = 1.0;
    double last_term = 0.0;  // magnitude of the last retained exponent term
};

enum class CdfMethod { exact, gamma };

/// Symbol statistics of the interferers: Gaussian codebooks (|s|^2 ~ Exp(1))
/// or unit-modulus symbols (|s|^2 = 1, the case whose second moment the
/// Gamma fit reproduces).
enum class InterferenceModel { gaussian_codebook, unit_modulus };

/// Laplace transform of the Gaussian-codebook interference power at u >= 0.
double laplace_b_gaussian(double u, const NetworkConfig& cfg, double r0);

/// Same transform at complex argument (Re u >= 0); the characteristic
/// function of the interference power is laplace_b_gaussian(-j w).
std::complex<double> laplace_b_gaussian(std::complex<double> u, const NetworkConfig& cfg,
                                        double r0);

/// Closed form valid for eta = 4 only.
double laplace_b_eta4(double u, const NetworkConfig& cfg, double r0);

/// K-term truncation of the moment series of the interference transform.
/// Throws ConvergenceError when the last retained term exceeds `tol`.
SeriesValue laplace_b_series(double u, const NetworkConfig& cfg, double r0,
                             const ConstellationMoments& moments, int K = 20, double tol = 1e-10);

BMoments b_moments(const NetworkConfig& cfg, double r0);
GammaApprox gamma_fit(const NetworkConfig& cfg, double r0);

/// Characteristic function E{exp(j t B)} of the interference power.
std::complex<double> interference_charfn(double t, const NetworkConfig& cfg, double r0,
                                         InterferenceModel model = InterferenceModel::gaussian_codebook);

double interference_cdf(double x, const NetworkConfig& cfg, double r0, CdfMethod method,
                        InterferenceModel model = InterferenceModel::gaussian_codebook);

/// CDF on a grid of points; the exact method shares characteristic function
/// evaluations across the grid.
std::vector<double> interference_cdf(const std::vector<double>& xs, const NetworkConfig& cfg, double r0,
                                     CdfMethod method,
                                     InterferenceModel model = InterferenceModel::gaussian_codebook);

/// SINR density given r0 under the Gamma interference approximation.
double sinr_pdf_gamma(double v, const NetworkConfig& cfg, double r0);
/// Matching survival function P(SINR > v).
double sinr_ccdf_gamma(double v, const NetworkConfig& cfg, double r0);

/// Exact P(SINR > v | r0) under Rayleigh fading of the serving link.
double sinr_ccdf_exact(double v, const NetworkConfig& cfg, double r0);

/// Nearest-BS distance law 2 pi lambda r exp(-pi lambda r^2).
class ServingDistance {
public:
    explicit ServingDistance(double lambda);

    double pdf(double r) const;
    double cdf(double r) const;
    double quantile(double p) const;
    double mode() const;
    double median() const { return quantile(0.5); }
    /// Upper truncation point used by spatial averages (1 - 1e-8 quantile).
    double truncation() const { return quantile(1.0 - 1e-8); }

    template <typename Rng>
    double sample(Rng& rng) const {
        std::exponential_distribution<double> e(1.0);
        return std::sqrt(e(rng) / (kPiValue * lambda_));
    }

    double lambda() const { return lambda_; }

private:
    static constexpr double kPiValue = 3.14159265358979323846;
    double lambda_;
};

}  // namespace fbr
