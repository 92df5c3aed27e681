#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "fbr/network_model.hpp"
#include "fbr/numerics.hpp"
#include "fbr/ppp_simulator.hpp"
#include "fbr/rate_analysis.hpp"

namespace fbr {

struct MetaQuery {
    double target_rate = 1.0;
    CodingConfig coding;   // eps is the FER threshold
    double p_t = 0.9;
    double r0 = 150.0;
    bool asymptotic = false;  // drop the blocklength penalties (a = b = 0)

    void validate() const;
    /// 2^{R_t + a - b} - 1, with a = b = 0 in the asymptotic regime.
    double threshold() const;
};

/// Beta law with mean `mean` and shape b = `beta`; the first shape is
/// mean * beta / (1 - mean).
struct BetaParams {
    double mean = 0.0;
    double beta = 0.0;

    double shape_a() const { return mean * beta / (1.0 - mean); }
    double shape_b() const { return beta; }
};

struct MomentSet {
    double m1 = 1.0;
    double m2 = 1.0;
    bool degenerate = true;  // variance <= 0 within tolerance
    BetaParams beta;
};

/// Moment E{P_s^d} of the approximate conditional success probability.
std::complex<double> approx_moment(std::complex<double> d, const MetaQuery& query,
                                   const NetworkConfig& cfg);
double approx_moment(double d, const MetaQuery& query, const NetworkConfig& cfg);

/// First moment in closed form; eta must be 4.
double approx_moment_eta4(const MetaQuery& query, const NetworkConfig& cfg);

MomentSet moment_set(const MetaQuery& query, const NetworkConfig& cfg);

/// Closed product over the realization's interferers.
double success_prob_approx(const NetworkRealization& net, const MetaQuery& query,
                           const NetworkConfig& cfg);

/// Fraction of `draws` fading redraws of `net` on which the FBR rate at the
/// SIR exceeds R_t. Interferer distances are kept.
double success_prob_exact(const NetworkRealization& net, const MetaQuery& query,
                          const NetworkConfig& cfg, std::size_t draws, Rng& rng);

/// Fraction of links whose success probability exceeds query.p_t.
GilPelaezResult meta_ccdf_gilpelaez_detailed(const MetaQuery& query, const NetworkConfig& cfg);
double meta_cdf_gilpelaez(const MetaQuery& query, const NetworkConfig& cfg);

/// The same on a grid of p_t values, sharing characteristic-function values.
std::vector<double> meta_ccdf_gilpelaez(const MetaQuery& query, const NetworkConfig& cfg,
                                        const std::vector<double>& p_grid);

/// Beta approximation 1 - I_{p_t}(a, b). A degenerate moment set gives the
/// step 1{p_t < M1}.
double meta_cdf_beta(const MetaQuery& query, const NetworkConfig& cfg);
double meta_cdf_beta(const MomentSet& moments, double p_t);

}  // namespace fbr
