#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace adt::stats {

inline double mean(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

/// Population standard deviation (divides by N), two-pass.
inline double population_stddev(std::span<const double> v, double mu) {
    if (v.empty()) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

inline double population_stddev(std::span<const double> v) { return population_stddev(v, mean(v)); }

/// A standard deviation this small relative to the mean is rounding noise
/// from averaging identical values; callers treat it as exactly zero.
inline bool negligible_spread(double sigma, double mu) {
    return sigma <= 1e-12 * std::fmax(1.0, std::fabs(mu));
}

}  // namespace adt::stats
