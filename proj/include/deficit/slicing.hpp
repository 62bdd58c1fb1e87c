#pragma once

#include "deficit/heat_model.hpp"
#include "deficit/quadrature.hpp"
#include "deficit/special.hpp"

namespace deficit {

/// Ball of radius rho = beta R about zbar = (0, ybar), |ybar| = R = sqrt(2 N tau),
/// cut at a fixed x. The y-section is the ball of radius s about ybar; the
/// sphere |y| = r meets it in a cap for r in (R - s, R + s).
struct SliceGeometry {
    int n;
    long long N;
    double tau;
    double beta;
    Vector x;
    double m;
    double R;
    double rho;
    double s;
    double rbar;   // sqrt(R^2 - s^2)
    double rbar2;  // R^2 (1 - beta^2) + |x|^2, free of cancellation
    bool degenerate;  // s == 0

    double lower() const { return R - s; }
    double upper() const { return R + s; }
};

/// DomainError unless beta in (0, 1), N >= 7, tau > 0 and |x| <= beta R.
SliceGeometry slice_geometry(int n, long long N, double tau, double beta, const Vector& x);

/// h(x, r) = r gamma(theta(x, r)) with cos theta = (r^2 + rbar^2) / (2 R r).
/// 1 - cos theta is formed as (s - r + R)(s + r - R) / (2 R r), so h vanishes
/// exactly at both ends, and is returned as exact 0 once log gamma < -745.
/// DomainError for r outside [R - s, R + s].
double slice_weight(const SliceGeometry& g, double r);
/// log h without the underflow cut; -inf only at the ends.
double log_slice_weight(const SliceGeometry& g, const CapFractionTable& cap, double r);

enum class MassMode { Quadrature, Asymptotic };

/// mu(x) = integral of h over (R - s, R + s). The asymptotic mode evaluates
///   beta^{N-3} / sqrt(pi tau) * int_0^s sigma^2 (1 - (sigma^2 + |x|^2) / (2 N beta^2 tau))^{(N-3)/2}
/// which differs from the exact mass by the factor sqrt(2 pi / N) / c(N).
double log_total_mass(const SliceGeometry& g, MassMode mode, const QuadratureSpec& spec = {});
double total_mass(const SliceGeometry& g, MassMode mode, const QuadratureSpec& spec = {});

struct RadialProfile {
    double log_integral;  // log int u(x, r^2 / 2N) h(x, r) dr
    double log_mass;      // log mu(x)
    double log_u_bar;     // log u(x, rbar^2 / 2N)
    /// |integral / (mu u(x, rbar^2 / 2N)) - 1|
    double concentration_gap;
};

RadialProfile radial_profile_integral(const SliceGeometry& g, const GaussianMixture& mix,
                                      const QuadratureSpec& spec = {});

struct SlicedAverageOptions {
    QuadratureSpec spec{.rel_tol = 1e-9, .abs_tol = 1e-14, .max_subdivisions = 2000, .truncation_sigmas = 12.0};
    long long max_N = 10000;
};

/// beta^{-m} / (2 tau omega_{m-1}) times the integral of v over B_{beta R}(zbar),
/// reduced by slicing to
///   beta^{-m} / (2 tau) * 2^{-n/2} (omega_{N-1} N^{n/2} / omega_{m-1}) * int int u h dr dx.
/// Every large factor is combined in log form; OverflowGuard if the combined
/// log leaves [-700, 700]. DomainError when N exceeds options.max_N.
double sliced_average(const GaussianMixture& mix, long long N, double tau, double beta,
                      const SlicedAverageOptions& options = {});

/// R^{m-2} v(zbar); equals tau^{n/2} u(0, tau) for every N.
double exact_anchor(const GaussianMixture& mix, long long N, double tau);

struct EllipticTarget {
    double quadrature;   // (4 pi)^{-n/2} int u(x, 0) exp(-|x|^2 / (4 tau)) dx
    double closed_form;  // tau^{n/2} u(0, tau)
};

/// ZeroTimeComponent if any time offset is zero; NonConvergence if the two
/// evaluations disagree by more than 1e-8 relative.
EllipticTarget elliptic_limit_target(const GaussianMixture& mix, double tau, const QuadratureSpec& spec = {});

}  // namespace deficit
