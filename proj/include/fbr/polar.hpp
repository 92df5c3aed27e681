#pragma once

#include <cstdint>
#include <vector>

namespace fbr {

using Bits = std::vector<std::uint8_t>;

struct PolarCode {
    int n = 0;
    int k = 0;
    std::vector<int> frozen_set;  // ascending
    std::vector<int> info_set;    // ascending
    Bits frozen_mask;             // frozen_mask[i] == 1 for frozen i
    double design_snr_db = 0.0;

    void validate() const;
};

/// Mean LLR of each synthetic channel under the Gaussian approximation, for
/// a BPSK channel at Es/N0 = design_snr_db (initial mean 4 Es/N0).
std::vector<double> polar_channel_means(int n, double design_snr_db);

/// Freezes the n - k synthetic channels with the smallest mean LLR.
PolarCode polar_construct(int n, int k, double design_snr_db);

/// x = u F^{(x)m} over GF(2), natural order. Self-inverse.
Bits polar_transform(Bits u);

Bits polar_encode(const PolarCode& code, const Bits& info);

/// Exact box-plus: 2 atanh(tanh(a/2) tanh(b/2)).
double boxplus(double a, double b);

/// Successive-cancellation decoder with buffers reused across frames. Not
/// safe for concurrent use; make one per thread.
class ScDecoder {
public:
    explicit ScDecoder(const PolarCode& code);

    /// Info bits from channel LLRs (positive favours 0). The re-encoded
    /// codeword of the decisions is available from codeword() afterwards.
    const Bits& decode(const std::vector<double>& llr);
    const Bits& codeword() const { return x_; }
    const Bits& u() const { return u_; }

private:
    void recurse(int depth, int offset, int len);

    const PolarCode* code_;
    std::vector<std::vector<double>> llr_;  // llr_[d] has n >> d entries
    std::vector<std::vector<std::uint8_t>> bits_;
    Bits u_;
    Bits x_;
    Bits info_;
};

Bits polar_sc_decode(const PolarCode& code, const std::vector<double>& llr);

}  // namespace fbr
