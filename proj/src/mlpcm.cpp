#include "fbr/mlpcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "fbr/numerics.hpp"
#include "fbr/parallel.hpp"

namespace fbr {

namespace {

constexpr std::uint64_t kFrameTag = 0x6d6c70636dULL;
constexpr std::size_t kBlockFrames = 256;

// Candidate symbols per (level, prefix of earlier level bits), split by the
// level's own bit.
struct LevelSubsets {
    std::vector<std::vector<std::vector<int>>> zeros, ones;  // [level][prefix]

    explicit LevelSubsets(const Constellation& c) {
        const int L = c.bits();
        zeros.resize(L);
        ones.resize(L);
        for (int level = 0; level < L; ++level) {
            zeros[level].resize(std::size_t{1} << level);
            ones[level].resize(std::size_t{1} << level);
            for (int m = 0; m < c.M; ++m) {
                std::size_t prefix = 0;
                for (int j = 0; j < level; ++j) prefix |= std::size_t(c.level_bit(m, j)) << j;
                (c.level_bit(m, level) ? ones : zeros)[level][prefix].push_back(m);
            }
        }
    }
};

double log_sum_exp_dist(std::complex<double> y, std::complex<double> g, double nv,
                        const Constellation& c, const std::vector<int>& idx) {
    double mx = -std::numeric_limits<double>::infinity();
    double buf[16];
    std::size_t j = 0;
    for (int m : idx) {
        buf[j] = -std::norm(y - g * c.symbols[m]) / nv;
        mx = std::max(mx, buf[j]);
        ++j;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < j; ++i) s += std::exp(buf[i] - mx);
    return mx + std::log(s);
}

double effective_noise(double nv) { return std::max(nv, 1e-30); }

}  // namespace

double MlpcmScheme::rate() const {
    return n() > 0 ? static_cast<double>(k()) * bits() / static_cast<double>(n()) : 0.0;
}

void MlpcmScheme::validate() const {
    constellation.validate();
    if (static_cast<int>(levels.size()) != constellation.bits())
        throw DomainError("MLPCM scheme needs one code per label bit");
    for (const auto& code : levels) {
        code.validate();
        if (code.n != n() || code.k != k()) throw DomainError("MLPCM levels must share n and k");
    }
}

double level_distance(const Constellation& c, int level) {
    double d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < c.M; ++a)
        for (int b = a + 1; b < c.M; ++b) {
            bool same_prefix = true;
            for (int j = 0; j < level && same_prefix; ++j)
                same_prefix = c.level_bit(a, j) == c.level_bit(b, j);
            if (same_prefix && c.level_bit(a, level) != c.level_bit(b, level))
                d = std::min(d, std::abs(c.symbols[a] - c.symbols[b]));
        }
    return d;
}

MlpcmScheme make_mlpcm(int M, int n, int k, double snr_db, Labeling labeling) {
    MlpcmScheme s;
    s.constellation = make_qam(M, labeling);
    for (int level = 0; level < s.constellation.bits(); ++level) {
        const double d = level_distance(s.constellation, level);
        s.levels.push_back(polar_construct(n, k, snr_db + 20.0 * std::log10(d / 2.0)));
    }
    return s;
}

std::vector<std::complex<double>> ml_map(const MlpcmScheme& scheme,
                                         const std::vector<Bits>& codewords) {
    const int L = scheme.bits();
    if (static_cast<int>(codewords.size()) != L) throw DomainError("ml_map: need log2(M) rows");
    const std::size_t n = codewords.front().size();
    for (const auto& row : codewords)
        if (row.size() != n) throw DomainError("ml_map: rows must have equal length");
    std::vector<std::complex<double>> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        unsigned label = 0;
        for (int i = 0; i < L; ++i) label |= unsigned(codewords[i][t] & 1u) << (L - 1 - i);
        out[t] = scheme.constellation.symbols[scheme.constellation.index_of_label(label)];
    }
    return out;
}

double stage_llr(std::complex<double> y, std::complex<double> gain, double noise_var,
                 const Constellation& c, int level, const std::vector<int>& prev_bits) {
    if (level < 0 || level >= c.bits()) throw DomainError("stage_llr: level out of range");
    if (static_cast<int>(prev_bits.size()) != level)
        throw DomainError("stage_llr: need one previous bit per earlier level");
    std::vector<int> zeros, ones;
    for (int m = 0; m < c.M; ++m) {
        bool match = true;
        for (int j = 0; j < level && match; ++j) match = c.level_bit(m, j) == prev_bits[j];
        if (match) (c.level_bit(m, level) ? ones : zeros).push_back(m);
    }
    const double nv = effective_noise(noise_var);
    return log_sum_exp_dist(y, gain, nv, c, zeros) - log_sum_exp_dist(y, gain, nv, c, ones);
}

FrameChannel FrameChannel::awgn(double snr_db) {
    return {1.0, std::pow(10.0, -snr_db / 10.0)};
}

FrameChannel FrameChannel::network(const LinkSample& s, const NetworkConfig& cfg) {
    return {std::sqrt(cfg.power * s.h0_gain * std::pow(s.r0, -cfg.eta)), cfg.noise + s.interference};
}

DecodeResult mlpcm_transmit_decode(const MlpcmScheme& scheme, const Bits& message,
                                   const FrameChannel& channel, Rng& rng, bool genie) {
    const int L = scheme.bits();
    const int n = scheme.n();
    const int k = scheme.k();
    if (static_cast<int>(message.size()) != k * L)
        throw DomainError("mlpcm_transmit_decode: message must hold k log2(M) bits");
    const Constellation& c = scheme.constellation;

    std::vector<Bits> codewords(L);
    for (int i = 0; i < L; ++i) {
        Bits info(message.begin() + i * k, message.begin() + (i + 1) * k);
        codewords[i] = polar_encode(scheme.levels[i], info);
    }
    const auto symbols = ml_map(scheme, codewords);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * channel.noise_var));
    std::vector<std::complex<double>> y(n);
    for (int t = 0; t < n; ++t)
        y[t] = channel.gain * symbols[t] + std::complex<double>(gauss(rng), gauss(rng));

    static thread_local std::string cached;
    static thread_local std::unique_ptr<LevelSubsets> subsets;
    const std::string key = c.name + (c.labeling == Labeling::gray ? "/gray" : "/sp");
    if (cached != key || !subsets) {
        subsets = std::make_unique<LevelSubsets>(c);
        cached = key;
    }
    const double nv = effective_noise(channel.noise_var);

    DecodeResult out;
    out.message.resize(message.size());
    out.level_error.assign(L, 0);
    std::vector<std::size_t> prefix(n, 0);
    std::vector<double> llr(n);
    for (int i = 0; i < L; ++i) {
        for (int t = 0; t < n; ++t)
            llr[t] = log_sum_exp_dist(y[t], channel.gain, nv, c, subsets->zeros[i][prefix[t]]) -
                     log_sum_exp_dist(y[t], channel.gain, nv, c, subsets->ones[i][prefix[t]]);
        ScDecoder dec(scheme.levels[i]);
        const Bits& info = dec.decode(llr);
        std::copy(info.begin(), info.end(), out.message.begin() + i * k);
        out.level_error[i] = !std::equal(info.begin(), info.end(), message.begin() + i * k);
        const Bits& decided = genie ? codewords[i] : dec.codeword();
        for (int t = 0; t < n; ++t) prefix[t] |= std::size_t(decided[t]) << i;
        out.frame_error = out.frame_error || out.level_error[i];
    }
    return out;
}

FerEstimate measure_fer(const MlpcmScheme& scheme, double snr_db, const MlpcmRunConfig& run) {
    scheme.validate();
    if (run.frames == 0) throw DomainError("measure_fer: frames must be >= 1");
    const int L = scheme.bits();
    NetworkConfig cfg = run.network;
    SimPlan plan;
    if (run.channel == MlpcmChannel::network) {
        // snr_db is the mean received SNR at r0
        cfg.noise = cfg.power * std::pow(run.r0, -cfg.eta) * std::pow(10.0, -snr_db / 10.0);
        plan.fixed_r0 = true;
        plan.r0 = run.r0;
        plan.validate(cfg);
    }
    FerEstimate est;
    est.level_errors.assign(L, 0);
    std::vector<DecodeResult> results(kBlockFrames);
    for (std::size_t start = 0; start < run.frames; start += kBlockFrames) {
        const std::size_t count = std::min(kBlockFrames, run.frames - start);
        parallel_for(count, run.threads, [&](std::size_t j) {
            Rng rng = substream(run.seed, kFrameTag, start + j);
            Bits msg(static_cast<std::size_t>(scheme.k()) * L);
            std::bernoulli_distribution coin(0.5);
            for (auto& b : msg) b = coin(rng);
            FrameChannel ch = FrameChannel::awgn(snr_db);
            if (run.channel == MlpcmChannel::network) {
                const NetworkRealization net = sample_realization(cfg, plan, rng);
                ch = FrameChannel::network({net.r0, net.h0_gain, net.interference}, cfg);
            }
            results[j] = mlpcm_transmit_decode(scheme, msg, ch, rng, run.genie);
        });
        for (std::size_t j = 0; j < count; ++j) {
            est.errors += results[j].frame_error ? 1 : 0;
            for (int i = 0; i < L; ++i) est.level_errors[i] += results[j].level_error[i];
        }
        est.frames += count;
        if (run.stop_after_errors > 0 && est.errors >= run.stop_after_errors) break;
    }
    est.fer = proportion_estimate(est.errors, est.frames, run.confidence);
    return est;
}

std::vector<SweepPoint> rate_sweep(int M, int n, const std::vector<double>& snr_grid_db,
                                   double target_fer, const MlpcmRunConfig& run,
                                   Labeling labeling, int k_step) {
    if (!(target_fer > 0.0 && target_fer < 1.0)) throw DomainError("rate_sweep: target FER must lie in (0, 1)");
    if (k_step < 1 || k_step > n) throw DomainError("rate_sweep: invalid k step");
    const auto allowed = static_cast<std::size_t>(std::floor(target_fer * static_cast<double>(run.frames)));
    const int J = n / k_step;
    std::vector<SweepPoint> out;
    for (double snr : snr_grid_db) {
        MlpcmRunConfig r = run;
        r.stop_after_errors = allowed + 1;
        SweepPoint best;
        best.snr_db = snr;
        int lo = 0, hi = J + 1;
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            const MlpcmScheme scheme = make_mlpcm(M, n, mid * k_step, snr, labeling);
            const FerEstimate f = measure_fer(scheme, snr, r);
            if (f.frames == run.frames && f.errors <= allowed) {
                lo = mid;
                best.k = mid * k_step;
                best.rate = scheme.rate();
                best.fer = f.fer.mean;
                best.ci_low = f.fer.ci_low;
                best.ci_high = f.fer.ci_high;
            } else {
                hi = mid;
            }
        }
        out.push_back(best);
    }
    return out;
}

double sweep_rate_at(const std::vector<SweepPoint>& sweep, double v) {
    if (sweep.empty()) return 0.0;
    if (!(v > 0.0)) return 0.0;
    const double db = 10.0 * std::log10(v);
    if (db <= sweep.front().snr_db)
        return sweep.front().rate * v / std::pow(10.0, sweep.front().snr_db / 10.0);
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        if (db <= sweep[i].snr_db) {
            const double w = (db - sweep[i - 1].snr_db) / (sweep[i].snr_db - sweep[i - 1].snr_db);
            return (1.0 - w) * sweep[i - 1].rate + w * sweep[i].rate;
        }
    }
    return sweep.back().rate;
}

Estimate mlpcm_network_average(const std::vector<SweepPoint>& awgn_sweep,
                               const std::vector<LinkSample>& samples, const NetworkConfig& cfg,
                               std::size_t batches, double confidence) {
    std::vector<double> r(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) r[i] = sweep_rate_at(awgn_sweep, samples[i].sinr(cfg));
    return batch_means(r, batches, confidence);
}

}  // namespace fbr
