#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "fbr/network_model.hpp"
#include "fbr/numerics.hpp"
#include "fbr/rate_analysis.hpp"

namespace fbr {

/// Gray: binary-reflected per dimension, sign bits first.
/// SetPartition: natural binary per dimension, least significant bits
/// first, so each level halves the subset and widens its distance.
enum class Labeling { gray, set_partition };

/// M-ary constellation with unit average power. Label bit i (counted from
/// the most significant end) is the bit carried by coding level i.
struct Constellation {
    int M = 0;
    std::vector<std::complex<double>> symbols;
    std::vector<unsigned> labels;  // labels[m] is the bit pattern of symbols[m]
    std::string name;
    Labeling labeling = Labeling::gray;

    int bits() const;
    /// Index m such that labels[m] == label.
    int index_of_label(unsigned label) const;
    /// Bit carried by level `level` in symbol m.
    int level_bit(int m, int level) const;
    void validate() const;

private:
    std::vector<int> by_label_;
    friend Constellation make_qam(int M, Labeling labeling);
};

/// Rectangular/square QAM for M in {2, 4, 8, 16}; 8-QAM is the 4 x 2 grid.
Constellation make_qam(int M, Labeling labeling = Labeling::gray);

struct CondRatePair {
    double mi = 0.0;    // bits
    double disp = 0.0;  // bits^2
};

/// Mutual information and dispersion of the constellation over AWGN at SNR v,
/// by tensor Gauss-Hermite quadrature.
CondRatePair cond_rate(const Constellation& c, double v, int order = kDefaultHermiteOrder);
double cond_mi(const Constellation& c, double v, int order = kDefaultHermiteOrder);

/// True when the symbols form a product grid A x jB, so that the channel
/// splits into two independent real PAM channels.
bool is_product_grid(const Constellation& c);

/// Same quantities from one-dimensional adaptive quadrature per real
/// dimension; only valid for product grids.
CondRatePair cond_rate_separable(const Constellation& c, double v);
double cond_dispersion(const Constellation& c, double v, int order = kDefaultHermiteOrder);

/// Spline table of cond_mi and sqrt(cond_dispersion) on a log-SNR grid
/// covering [1e-4, 1e4], built from cond_rate_separable for product grids
/// and from cond_rate otherwise. Beyond the grid the rates saturate at log2(M)
/// with zero dispersion; below it they scale linearly in v.
class CondRateTable {
public:
    static const CondRateTable& get(const Constellation& c);

    double mi(double v) const;
    double sqrt_disp(double v) const;
    double v_max() const { return v_hi_; }
    double max_rate() const { return log2m_; }

private:
    struct Impl;
    explicit CondRateTable(const Constellation& c);
    std::shared_ptr<const Impl> impl_;
    double v_lo_ = 1e-4;
    double v_hi_ = 1e4;
    double log2m_ = 0.0;
    double mi_lo_ = 0.0;
    double sd_lo_ = 0.0;
};

/// Conditional FBR rate of the constellation at SNR v (table based).
RateResult qam_fbr_rate(const Constellation& c, double v, const CodingConfig& coding);

/// Gamma-approximate averages at fixed r0.
double qam_capacity_fixed_r0(const Constellation& c, const LinkGeometry& geom,
                             const NetworkConfig& cfg);
double qam_sqrt_dispersion_fixed_r0(const Constellation& c, const LinkGeometry& geom,
                                    const NetworkConfig& cfg);
RateResult avg_rate_qam_fixed_r0(const Constellation& c, const LinkGeometry& geom,
                                 const NetworkConfig& cfg, const CodingConfig& coding);

RateResult avg_rate_qam_spatial(const Constellation& c, const NetworkConfig& cfg,
                                const CodingConfig& coding);

}  // namespace fbr
