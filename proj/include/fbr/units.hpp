#pragma once

#include <cmath>

namespace fbr::units {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// BS per km^2 to BS per m^2.
inline double per_km2_to_per_m2(double d) { return d * 1e-6; }
inline double per_m2_to_per_km2(double d) { return d * 1e6; }

/// Reference distance at which a transmit SNR given in dB is measured.
inline constexpr double kSnrReferenceMeters = 1000.0;

}  // namespace fbr::units
