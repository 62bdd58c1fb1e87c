#pragma once

#include <functional>
#include <span>
#include <vector>

#include "deficit/linalg.hpp"

namespace deficit {

/// Tolerances and budget for the adaptive integrators.
struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    int max_subdivisions = 2000;
    /// Half-width, in standard deviations, used when an unbounded Gaussian-weighted
    /// domain is truncated to a box.
    double truncation_sigmas = 12.0;

    /// Throws DomainError unless every field is in range.
    void validate() const;
};

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions_used = 0;
    bool converged = false;
};

using Integrand1d = std::function<double(double)>;
using IntegrandNd = std::function<double(const Vector&)>;

/// Globally adaptive 21-point Gauss-Kronrod integration of `f` over [a, b].
///
/// Throws NonConvergence when the subdivision budget runs out before the error
/// estimate drops below max(abs_tol, rel_tol*|value|), and NonFiniteIntegrand
/// when a sample is NaN or infinite. Deterministic for fixed inputs.
QuadResult integrate_1d(const Integrand1d& f, double a, double b, const QuadratureSpec& spec = {});

/// Same as above, starting from the partition given by sorted `breakpoints`
/// (at least two, first = lower limit, last = upper limit). Interior breakpoints
/// let the caller point the integrator at narrow peaks.
QuadResult integrate_1d(const Integrand1d& f, std::span<const double> breakpoints,
                        const QuadratureSpec& spec = {});

/// Returns log of the integral of exp(logf) over [a, b].
///
/// Each panel is accumulated against its own maximum and panels are combined
/// against a running global maximum, so nothing under- or overflows as long as
/// the answer itself is representable as a log. `logf` may return -inf. Only
/// `rel_tol` applies: an absolute tolerance has no meaning for a log result.
/// Returns -inf when every sample is -inf.
double integrate_log_1d(const Integrand1d& logf, double a, double b, const QuadratureSpec& spec = {});
double integrate_log_1d(const Integrand1d& logf, std::span<const double> breakpoints,
                        const QuadratureSpec& spec = {});

/// Iterated adaptive integration over the box center +- half_widths, n <= 3.
/// `breakpoints`, when non-empty, holds one interior breakpoint list per axis.
QuadResult integrate_box(const IntegrandNd& f, const Vector& center, const Vector& half_widths,
                         const QuadratureSpec& spec = {},
                         std::span<const std::vector<double>> breakpoints = {});

/// Integral over the ball |x - center| <= radius, iterated over exact chords
/// so the integrand is never cut by the boundary.
QuadResult integrate_ball(const IntegrandNd& f, const Vector& center, double radius,
                          const QuadratureSpec& spec = {},
                          std::span<const std::vector<double>> breakpoints = {});

/// Sorted, de-duplicated partition of [a, b] containing every point of
/// `interior` that falls strictly inside.
std::vector<double> make_partition(double a, double b, std::span<const double> interior);

}  // namespace deficit
