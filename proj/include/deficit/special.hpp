#pragma once

namespace deficit {

/// log Gamma(x) for x > 0 by upward recursion into a Stirling series.
/// Reentrant, unlike std::lgamma which writes the global signgam.
double log_gamma(double x);

/// log Gamma(x + d) - log Gamma(x), free of the cancellation that differencing
/// two huge log_gamma values would suffer. Requires x > 0 and x + d > 0.
double log_gamma_ratio(double x, double d);

/// log B(a, b).
double log_beta(double a, double b);

/// log I_x(a, b), the regularized incomplete beta function. `y` must equal
/// 1 - x; passing it separately keeps full precision when x is close to 1.
/// Continued fraction with the x^a y^b / B(a,b) prefactor kept in log form.
double log_incomplete_beta(double a, double b, double x, double y);

/// log of the volume of the unit k-sphere in R^{k+1}.
double log_sphere_volume(int k);

/// N^{n/2} * omega_{n+N-1} / omega_{N-1}, assembled in log form. Tends to
/// (2 pi)^{n/2} at rate 1/N; exactly 2 pi for n = 2.
double omega_ratio(int n, long long N);
double log_omega_ratio(int n, long long N);

/// (1 - delta/N)^{N/2}, which never exceeds exp(-delta/2). DomainError unless
/// 0 <= delta < N and N >= 2.
double half_power_decay(double delta, double N);

/// Fraction gamma(N, theta) of the unit sphere S^{N-1} lying in a geodesic
/// ball of radius theta. Immutable after construction.
class CapFractionTable {
public:
    explicit CapFractionTable(long long N);

    long long dimension() const noexcept { return N_; }
    /// log c with c = omega_{N-1} / omega_{N-2} = integral_0^pi sin^{N-2}.
    double log_normalizer() const noexcept { return log_c_; }

    /// gamma(theta), theta in [0, pi]; DomainError otherwise.
    double value(double theta) const;
    double log_value(double theta) const;

    /// log gamma for an angle given through sin^2 and cos^2 (which must sum to
    /// one); `obtuse` selects theta > pi/2. Callers that can form 1 - cos(theta)
    /// without cancellation should use this instead of an arccos round trip.
    double log_value_sc(double sin2, double cos2, bool obtuse) const;

    /// log of the density gamma'(theta) = sin^{N-2}(theta) / c.
    double log_density(double theta) const;

private:
    long long N_;
    double a_;  // (N - 1) / 2
    double log_c_;
};

/// gamma(N, theta); see CapFractionTable.
double cap_fraction(long long N, double theta);

}  // namespace deficit
