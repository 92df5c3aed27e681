#pragma once

#include <optional>

#include "fbr/constellation_rate.hpp"
#include "fbr/network_model.hpp"
#include "fbr/ppp_simulator.hpp"
#include "fbr/rate_analysis.hpp"

namespace fbr {

struct PenaltyTerms {
    double a = 0.0;  // log2(e) Q^{-1}(eps) / sqrt(n)
    double b = 0.0;  // log2(n) / (2n)
};

PenaltyTerms penalty_terms(const CodingConfig& coding);

struct OutageQuery {
    double target_rate = 1.0;
    CodingConfig coding;           // eps is the FER threshold
    std::optional<double> r0;      // empty: average over the serving distance

    void validate() const;
    /// R_t + a - b
    double shifted_rate() const;
};

/// Rate outage P(log2(1 + SINR) < rate) at fixed r0. Any real threshold is
/// accepted; thresholds <= 0 give 0.
double outage_ar(double r0, double target_rate, const NetworkConfig& cfg);

/// Same, averaged over the serving distance.
double outage_spatial_ar(double target_rate, const NetworkConfig& cfg);

/// Closed form of outage_spatial_ar for eta = 4.
double outage_spatial_ar_eta4(double target_rate, const NetworkConfig& cfg);

struct OutageBounds {
    double lower = 0.0;
    double upper = 0.0;
};

OutageBounds outage_bounds(double r0, const OutageQuery& query, const NetworkConfig& cfg);

/// Upper bound averaged over r0 by quadrature.
double outage_spatial_upper(const OutageQuery& query, const NetworkConfig& cfg);

/// Closed form of outage_spatial_upper; eta must be 4.
double outage_spatial_eta4(const OutageQuery& query, const NetworkConfig& cfg);

enum class OutageSource { upper_bound, simulated };

/// (1 - outage)(1 - eps_bar)
double reliability_from_outage(double outage, double eps_bar);

/// Guaranteed reliability for the query's geometry. With OutageSource::simulated
/// the outage comes from empirical_outage under `plan` (its r0 and fixed_r0
/// fields are overridden by the query).
double reliability(const OutageQuery& query, const NetworkConfig& cfg,
                   OutageSource source = OutageSource::upper_bound,
                   const SimPlan* plan = nullptr);

/// Asymptotic-regime reliability 1 - outage.
double reliability_ar(double target_rate, const NetworkConfig& cfg, std::optional<double> r0);

/// Monte Carlo outage of the M-ary FBR rate.
Estimate outage_qam_mc(const Constellation& c, const OutageQuery& query, const NetworkConfig& cfg,
                       const SimPlan& plan);

}  // namespace fbr
