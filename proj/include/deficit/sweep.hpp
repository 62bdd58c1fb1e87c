#pragma once

#include <span>
#include <utility>
#include <vector>

namespace deficit {

using RatePoint = std::pair<double, double>;  // (parameter > 0, |residual| >= 0)

/// Least-squares line through (log parameter, log |residual|).
struct RateFit {
    double slope;
    double intercept;
    double r_squared;
    std::vector<RatePoint> points;  // the points used, in input order
    int excluded;                   // points at or below the noise floor
};

inline constexpr double kDefaultNoiseFloor = 1e-13;

/// InsufficientPoints unless at least three points lie above `noise_floor`;
/// DomainError for a non-positive parameter or negative residual.
RateFit fit_rate(std::span<const RatePoint> points, double noise_floor = kDefaultNoiseFloor);

/// A sequence indexed by a growing parameter counts as bounded when its fitted
/// log-log slope does not exceed `max_slope`.
bool fits_bounded(const RateFit& fit, double max_slope = 0.1);

}  // namespace deficit
