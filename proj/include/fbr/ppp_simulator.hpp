#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "fbr/constellation_rate.hpp"
#include "fbr/network_model.hpp"
#include "fbr/rate_analysis.hpp"

namespace fbr {

using Rng = std::mt19937_64;

/// Independent generator for (seed, tag, index), seeded through seed_seq.
Rng substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

struct SimPlan {
    std::size_t realizations = 100000;
    std::size_t fading_draws = 1;
    double region_scale = 30.0;  // radius = region_scale / sqrt(pi lambda)
    std::uint64_t seed = 1;
    bool fixed_r0 = true;
    double r0 = 250.0;
    std::size_t batches = 64;
    int threads = 1;
    double confidence = 0.99;

    void validate(const NetworkConfig& cfg) const;
    /// max(region_scale / sqrt(pi lambda), 10 r0)
    double region_radius(const NetworkConfig& cfg) const;
};

/// One snapshot of the network around the typical user at the origin.
/// Fading is stored as power gains |h|^2.
struct NetworkRealization {
    double r0 = 0.0;
    double h0_gain = 1.0;
    std::vector<double> distances;  // ascending, all > r0
    std::vector<double> gains;
    double interference = 0.0;  // sum P g_i r_i^-eta

    double signal(const NetworkConfig& cfg) const;
    double sinr(const NetworkConfig& cfg) const;
    double sir(const NetworkConfig& cfg) const;
};

NetworkRealization sample_realization(const NetworkConfig& cfg, const SimPlan& plan, Rng& rng);

/// Fresh fading for every link of `net`, recomputing the interference.
void redraw_fading(NetworkRealization& net, const NetworkConfig& cfg, Rng& rng);

/// Minimal per-sample record: serving distance, serving gain and interference.
struct LinkSample {
    double r0 = 0.0;
    double h0_gain = 0.0;
    double interference = 0.0;

    double sinr(const NetworkConfig& cfg) const;
};

/// plan.realizations x plan.fading_draws samples in index order. Realization i
/// lives in batch i % plan.batches, and each batch has its own substream, so
/// the output does not depend on plan.threads.
std::vector<LinkSample> sample_links(const NetworkConfig& cfg, const SimPlan& plan,
                                     std::uint64_t tag = 0);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t samples = 0;

    bool contains(double x) const { return x >= ci_low && x <= ci_high; }
};

/// Batch-means estimate of the mean of `values`; sample i belongs to batch
/// i % batches. Student-t interval at the given confidence.
Estimate batch_means(const std::vector<double>& values, std::size_t batches, double confidence);

/// Estimate of a proportion with k hits in n trials; uses (k+1)/(n+2) for the
/// standard error so the interval is never empty at k = 0 or k = n.
Estimate proportion_estimate(std::size_t hits, std::size_t trials, double confidence);

enum class RateMode { gaussian, qam };

struct EmpiricalRate {
    Estimate rate;
    Estimate capacity;
    Estimate sqrt_dispersion;
};

/// Average FBR rate over exact SINR samples. `constellation` is required in
/// qam mode and ignored otherwise.
EmpiricalRate empirical_avg_rate(const NetworkConfig& cfg, const CodingConfig& coding,
                                 const SimPlan& plan, RateMode mode,
                                 const Constellation* constellation = nullptr);

/// Same quantities from pre-drawn samples.
EmpiricalRate empirical_avg_rate(const std::vector<LinkSample>& samples, const NetworkConfig& cfg,
                                 const CodingConfig& coding, std::size_t batches,
                                 double confidence, RateMode mode,
                                 const Constellation* constellation = nullptr);

/// Fraction of samples whose conditional FBR rate is below `target_rate`.
/// `coding.eps` is the FER threshold.
Estimate empirical_outage(const NetworkConfig& cfg, double target_rate, const CodingConfig& coding,
                          const SimPlan& plan, RateMode mode,
                          const Constellation* constellation = nullptr);

Estimate empirical_outage(const std::vector<LinkSample>& samples, const NetworkConfig& cfg,
                          double target_rate, const CodingConfig& coding, double confidence,
                          RateMode mode, const Constellation* constellation = nullptr);

/// Per-realization success probabilities.
struct EmpiricalMeta {
    std::vector<double> exact;   // fraction of fading draws with R(Omega) > R_t
    std::vector<double> approx;  // closed product over interferers

    static double ccdf(const std::vector<double>& ps, double p_t);
};

/// Requires plan.fixed_r0. SIR-based unless include_noise, in which case
/// cfg.noise enters the exact variant.
EmpiricalMeta empirical_meta(const NetworkConfig& cfg, double target_rate,
                             const CodingConfig& coding, const SimPlan& plan, bool include_noise);

/// Kolmogorov distance between the empirical CDF of `samples` and `cdf`.
template <typename Cdf>
double kolmogorov_distance(std::vector<double> samples, Cdf&& cdf);

}  // namespace fbr

#include <algorithm>
#include <cmath>

namespace fbr {

template <typename Cdf>
double kolmogorov_distance(std::vector<double> samples, Cdf&& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n),
                      std::abs(static_cast<double>(i + 1) / n - f)});
    }
    return d;
}

}  // namespace fbr
