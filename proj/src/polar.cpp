#include "fbr/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fbr/numerics.hpp"

namespace fbr {

namespace {

constexpr double kMaxLlr = 1e4;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// log phi(x) of the Gaussian-approximation density evolution, with phi(0) = 1.
double log_phi(double x) {
    if (x <= 0.0) return 0.0;
    if (x < 10.0) return std::min(0.0, -0.4527 * std::pow(x, 0.86) + 0.0218);
    return 0.5 * std::log(3.14159265358979323846 / x) - 0.25 * x + std::log1p(-10.0 / (7.0 * x));
}

// Mean of the check-node output for two inputs of mean m.
double check_mean(double m) {
    if (m <= 0.0) return 0.0;
    const double lp = log_phi(m);
    // 1 - (1 - phi)^2 = phi (2 - phi)
    const double target = lp + std::log(2.0 - std::exp(lp));
    if (target >= 0.0) return 0.0;
    double lo = 0.0, hi = m;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (log_phi(mid) > target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

void fill_means(std::vector<double>& out, int offset, int len, double m) {
    if (len == 1) {
        out[offset] = m;
        return;
    }
    fill_means(out, offset, len / 2, check_mean(m));
    fill_means(out, offset + len / 2, len / 2, 2.0 * m);
}

}  // namespace

void PolarCode::validate() const {
    if (!is_power_of_two(n)) throw DomainError("polar code length must be a power of two");
    if (k < 0 || k > n) throw DomainError("polar code needs 0 <= k <= n");
    if (static_cast<int>(frozen_set.size()) != n - k || static_cast<int>(info_set.size()) != k)
        throw DomainError("polar code index sets do not match (n, k)");
    if (static_cast<int>(frozen_mask.size()) != n) throw DomainError("polar frozen mask has wrong size");
}

std::vector<double> polar_channel_means(int n, double design_snr_db) {
    if (!is_power_of_two(n)) throw DomainError("polar code length must be a power of two");
    std::vector<double> means(n);
    fill_means(means, 0, n, 4.0 * std::pow(10.0, design_snr_db / 10.0));
    return means;
}

PolarCode polar_construct(int n, int k, double design_snr_db) {
    if (!is_power_of_two(n)) throw DomainError("polar code length must be a power of two");
    if (k < 0 || k > n) throw DomainError("polar code needs 0 <= k <= n");
    const auto means = polar_channel_means(n, design_snr_db);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return means[a] < means[b]; });
    PolarCode code;
    code.n = n;
    code.k = k;
    code.design_snr_db = design_snr_db;
    code.frozen_mask.assign(n, 0);
    for (int i = 0; i < n - k; ++i) code.frozen_mask[order[i]] = 1;
    for (int i = 0; i < n; ++i) (code.frozen_mask[i] ? code.frozen_set : code.info_set).push_back(i);
    return code;
}

Bits polar_transform(Bits u) {
    const std::size_t n = u.size();
    if (n == 0 || (n & (n - 1)) != 0) throw DomainError("polar_transform: length must be a power of two");
    for (std::size_t half = 1; half < n; half *= 2)
        for (std::size_t start = 0; start < n; start += 2 * half)
            for (std::size_t i = start; i < start + half; ++i) u[i] ^= u[i + half];
    return u;
}

Bits polar_encode(const PolarCode& code, const Bits& info) {
    if (static_cast<int>(info.size()) != code.k)
        throw DomainError("polar_encode: info length must equal k");
    Bits u(code.n, 0);
    for (int j = 0; j < code.k; ++j) u[code.info_set[j]] = info[j] & 1u;
    return polar_transform(std::move(u));
}

double boxplus(double a, double b) {
    const double s = (a < 0.0) != (b < 0.0) ? -1.0 : 1.0;
    const double m = std::min(std::abs(a), std::abs(b));
    return s * m + std::log1p(std::exp(-std::abs(a + b))) - std::log1p(std::exp(-std::abs(a - b)));
}

ScDecoder::ScDecoder(const PolarCode& code) : code_(&code) {
    code.validate();
    int depth = 0;
    for (int len = code.n; len >= 1; len /= 2, ++depth) {
        llr_.emplace_back(len);
        bits_.emplace_back(len);
    }
    u_.assign(code.n, 0);
    info_.assign(code.k, 0);
}

void ScDecoder::recurse(int depth, int offset, int len) {
    auto& L = llr_[depth];
    auto& X = bits_[depth];
    if (len == 1) {
        const std::uint8_t bit = code_->frozen_mask[offset] ? 0 : (L[0] < 0.0 ? 1 : 0);
        u_[offset] = bit;
        X[0] = bit;
        return;
    }
    const int half = len / 2;
    auto& Lc = llr_[depth + 1];
    auto& Xc = bits_[depth + 1];
    for (int i = 0; i < half; ++i) Lc[i] = boxplus(L[i], L[i + half]);
    recurse(depth + 1, offset, half);
    for (int i = 0; i < half; ++i) {
        X[i] = Xc[i];
        Lc[i] = L[i + half] + (Xc[i] ? -L[i] : L[i]);
    }
    recurse(depth + 1, offset + half, half);
    for (int i = 0; i < half; ++i) {
        X[i] ^= Xc[i];
        X[i + half] = Xc[i];
    }
}

const Bits& ScDecoder::decode(const std::vector<double>& llr) {
    if (static_cast<int>(llr.size()) != code_->n)
        throw DomainError("polar_sc_decode: llr length must equal n");
    // Clamp so that infinite proxies stay finite through box-plus.
    std::transform(llr.begin(), llr.end(), llr_[0].begin(),
                   [](double v) { return std::clamp(v, -kMaxLlr, kMaxLlr); });
    recurse(0, 0, code_->n);
    x_.assign(bits_[0].begin(), bits_[0].end());
    for (int j = 0; j < code_->k; ++j) info_[j] = u_[code_->info_set[j]];
    return info_;
}

Bits polar_sc_decode(const PolarCode& code, const std::vector<double>& llr) {
    ScDecoder dec(code);
    return dec.decode(llr);
}

}  // namespace fbr
