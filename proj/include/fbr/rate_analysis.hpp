#pragma once

#include <cstdint>

#include "fbr/network_model.hpp"

namespace fbr {

struct CodingConfig {
    std::int64_t n = 128;
    double eps = 1e-2;

    void validate() const;
    /// Q^{-1}(eps) / sqrt(n)
    double backoff() const;
    /// log2(n) / (2n)
    double correction() const;
};

struct RateResult {
    double rate = 0.0;
    double capacity_term = 0.0;
    double dispersion_term = 0.0;
    double correction_term = 0.0;
    double clamped = 0.0;  // max(rate, 0)

    static RateResult compose(double capacity, double sqrt_dispersion, const CodingConfig& coding);
};

inline constexpr double kLog2e = 1.4426950408889634;

/// sqrt of the AWGN channel dispersion, in bits.
double awgn_sqrt_dispersion(double alpha);

RateResult awgn_fbr_rate(double alpha, const CodingConfig& coding);

/// Average capacity at fixed r0 under Rayleigh fading and PPP interference.
double avg_capacity_ar(const LinkGeometry& geom, const NetworkConfig& cfg);

/// Average of sqrt(V(SINR)) at fixed r0.
double avg_sqrt_dispersion(const LinkGeometry& geom, const NetworkConfig& cfg);

RateResult avg_rate_fixed_r0(const LinkGeometry& geom, const NetworkConfig& cfg,
                             const CodingConfig& coding);

double spatial_capacity_ar(const NetworkConfig& cfg);
double spatial_sqrt_dispersion(const NetworkConfig& cfg);

/// SNR set on which the AWGN FBR rate exceeds a target. The rate dips below
/// its v = 0 value log2(n)/(2n) before growing, so the set is
/// [0, below) union (above, inf); `below` is 0 when the target is >= log2(n)/(2n).
struct SuccessRegion {
    double below = 0.0;
    double above = 0.0;

    bool success(double v) const { return v < below || v > above; }
};

SuccessRegion fbr_success_region(double target_rate, const CodingConfig& coding);

RateResult avg_rate_spatial(const NetworkConfig& cfg, const CodingConfig& coding);

}  // namespace fbr
