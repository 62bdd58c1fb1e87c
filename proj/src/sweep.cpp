#include "deficit/sweep.hpp"

#include <cmath>
#include <string>

#include "deficit/error.hpp"

namespace deficit {

RateFit fit_rate(std::span<const RatePoint> points, double noise_floor) {
    RateFit fit{};
    for (const auto& [p, y] : points) {
        if (!(p > 0.0) || !(y >= 0.0)) throw Error(ErrorKind::DomainError, "rate points need p > 0 and |residual| >= 0");
        if (y > noise_floor) {
            fit.points.emplace_back(p, y);
        } else {
            ++fit.excluded;
        }
    }
    const std::size_t k = fit.points.size();
    if (k < 3) {
        throw Error(ErrorKind::InsufficientPoints,
                    "need 3 points above the noise floor, have " + std::to_string(k));
    }
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [p, y] : fit.points) {
        mx += std::log(p);
        my += std::log(y);
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto& [p, y] : fit.points) {
        const double dx = std::log(p) - mx;
        const double dy = std::log(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw Error(ErrorKind::InsufficientPoints, "rate fit needs distinct parameters");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

bool fits_bounded(const RateFit& fit, double max_slope) { return fit.slope <= max_slope; }

}  // namespace deficit
