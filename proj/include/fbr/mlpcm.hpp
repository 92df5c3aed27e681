#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "fbr/constellation_rate.hpp"
#include "fbr/polar.hpp"
#include "fbr/ppp_simulator.hpp"

namespace fbr {

/// One polar code per label bit; level i carries label bit (bits - 1 - i).
struct MlpcmScheme {
    Constellation constellation;
    std::vector<PolarCode> levels;

    int n() const { return levels.empty() ? 0 : levels.front().n; }
    int k() const { return levels.empty() ? 0 : levels.front().k; }
    int bits() const { return constellation.bits(); }
    /// Information bits per channel use, k log2(M) / n.
    double rate() const;
    void validate() const;
};

/// Smallest distance between symbols that differ in the level's bit but
/// agree on all earlier levels.
double level_distance(const Constellation& c, int level);

/// Equal-rate scheme. Level i is constructed at design SNR
/// snr_db + 20 log10(d_i / 2), d_i = level_distance(c, i), i.e. the SNR of
/// the equivalent BPSK channel.
MlpcmScheme make_mlpcm(int M, int n, int k, double snr_db, Labeling labeling = Labeling::gray);

/// Codeword matrix (bits rows of n bits) to n symbols.
std::vector<std::complex<double>> ml_map(const MlpcmScheme& scheme,
                                         const std::vector<Bits>& codewords);

/// LLR of the level bit given the earlier levels' bits of this symbol.
double stage_llr(std::complex<double> y, std::complex<double> gain, double noise_var,
                 const Constellation& c, int level, const std::vector<int>& prev_bits);

/// Flat channel for one frame: y = gain s + CN(0, noise_var).
struct FrameChannel {
    std::complex<double> gain = 1.0;
    double noise_var = 0.0;

    static FrameChannel awgn(double snr_db);
    /// Effective gain sqrt(P h0 r0^-eta) and noise sigma^2 + B of one draw;
    /// the interference is treated as Gaussian with its realized power.
    static FrameChannel network(const LinkSample& s, const NetworkConfig& cfg);
};

struct DecodeResult {
    Bits message;
    std::vector<std::uint8_t> level_error;
    bool frame_error = false;
};

/// Encodes `message` (k bits per level, level 0 first), sends it over the
/// channel and runs multistage decoding. With `genie` set, later stages use
/// the transmitted codewords instead of earlier decisions.
DecodeResult mlpcm_transmit_decode(const MlpcmScheme& scheme, const Bits& message,
                                   const FrameChannel& channel, Rng& rng, bool genie = false);

struct FerEstimate {
    std::size_t frames = 0;
    std::size_t errors = 0;
    std::vector<std::size_t> level_errors;
    Estimate fer;
};

enum class MlpcmChannel { awgn, network };

struct MlpcmRunConfig {
    std::size_t frames = 10000;
    std::uint64_t seed = 1;
    int threads = 1;
    double confidence = 0.99;
    bool genie = false;
    /// Stop once errors exceed this count; 0 disables early stopping.
    std::size_t stop_after_errors = 0;
    MlpcmChannel channel = MlpcmChannel::awgn;
    // network channel only
    NetworkConfig network;
    double r0 = 150.0;
};

/// FER at AWGN SNR `snr_db` (awgn channel) or over network draws whose
/// noise follows snr_db through network.noise (network channel).
FerEstimate measure_fer(const MlpcmScheme& scheme, double snr_db, const MlpcmRunConfig& run);

struct SweepPoint {
    double snr_db = 0.0;
    int k = 0;
    double rate = 0.0;          // k log2(M) / n
    double fer = 0.0;           // measured at k
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// For each SNR, the largest k (multiple of `k_step`, equal on every level)
/// whose measured FER is at most target_fer. Codes are constructed per SNR.
std::vector<SweepPoint> rate_sweep(int M, int n, const std::vector<double>& snr_grid_db,
                                   double target_fer, const MlpcmRunConfig& run,
                                   Labeling labeling = Labeling::gray, int k_step = 4);

/// Piecewise-linear interpolation (in dB) of an AWGN sweep at linear SNR v;
/// 0 below the grid, last value above it.
double sweep_rate_at(const std::vector<SweepPoint>& sweep, double v);

/// Average of the AWGN sweep rate over network SINR samples.
Estimate mlpcm_network_average(const std::vector<SweepPoint>& awgn_sweep,
                               const std::vector<LinkSample>& samples, const NetworkConfig& cfg,
                               std::size_t batches, double confidence);

}  // namespace fbr
