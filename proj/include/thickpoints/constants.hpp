#pragma once

#include <cmath>
#include <numbers>

namespace thickpoints {

/// Leading coefficient of the planar lattice Green function, 2/pi.
inline constexpr double kGreenSlope = 2.0 / std::numbers::pi;

/// Additive constant of the diagonal lattice Green function asymptotic,
/// (2/pi) * (gamma_EM + log(8) / 2).
inline const double kGreenOffset =
    kGreenSlope * (std::numbers::egamma + 0.5 * std::log(8.0));

/// log N / N^(2 - a): mass carried by one thick point at scale N.
inline double thick_point_weight(int N, double a) {
    const double n = static_cast<double>(N);
    return std::log(n) / std::pow(n, 2.0 - a);
}

/// g * a * log^2 N: local time a site needs to be a-thick at scale N.
inline double thick_threshold(int N, double a) {
    const double l = std::log(static_cast<double>(N));
    return kGreenSlope * a * l * l;
}

/// e^{c0 a / g}: ratio between the discrete limit and the chaos measure.
inline double chaos_normalisation(double a) { return std::exp(kGreenOffset * a / kGreenSlope); }

} // namespace thickpoints
