#pragma once

#include <functional>

#include "deficit/heat_model.hpp"

namespace deficit {

inline constexpr long long kMinLiftDimension = 7;

/// A point (x, y) of R^n x R^N, recorded through x and r = |y|; every lifted
/// quantity is radial in y. Derived: m = n + N and tau = r^2 / (2N).
struct LiftPoint {
    Vector x;
    double r;
    long long N;

    static LiftPoint at_tau(const Vector& x, double tau, long long N);

    int n() const { return static_cast<int>(x.size()); }
    double m() const { return static_cast<double>(N) + n(); }
    double tau() const { return r * r / (2.0 * static_cast<double>(N)); }

    /// DomainError unless r > 0, N >= 7 and 1 <= n <= 3.
    void validate() const;
};

/// Hess(b^2) in block form, exact: the x-block S, the cross block G_i y_alpha
/// and the y-block A delta + C y y^T.
struct B2Hessian {
    Matrix S;
    Vector G;
    double A;
    double C;
};

/// Everything the elliptic side needs at one lifted point. Gradients are in
/// reduced coordinates: x-part first, then d/dr.
struct LiftEval {
    double log_v;          // log v, v = r^{2-m} exp(-f(x, tau))
    double log_b;          // log r + f / (m - 2)
    double d0;             // 2m (|grad b|^2 - 1), evaluated without cancellation
    double psi;            // b^m Laplacian v = b^2 Laplacian v / v
    double lap_v_over_v;
    LiftVector grad_log_b;
    LiftVector grad_log_v;
    LiftVector grad_psi;
    B2Hessian hess_b2;
    double B_norm2_exact;  // |Hess b^2 - (Laplacian b^2 / m) I|^2
    double lap_b2;
    double f;              // f(x, tau), so that r^{m-2} v = exp(-f)
};

LiftEval lift_eval(const GaussianMixture& mix, const LiftPoint& p);

/// d0(x, sqrt(2 N tau), N) - 4 D0(x, tau).
double deficit_gap(const GaussianMixture& mix, const Vector& x, double tau, long long N);

using ReducedFunction = std::function<double(const Vector& x, double r)>;

/// Laplacian on R^n x R^N of a function radial in y:
///   Laplacian_x g + g_rr + ((N - 1) / r) g_r,
/// by central differences. StepTooLarge unless 0 < r_step < r.
double radial_laplacian_fd(const ReducedFunction& g, const Vector& x, double r, long long N, double step);
double radial_laplacian_fd(const ReducedFunction& g, const Vector& x, double r, long long N, double x_step,
                           double r_step);

/// Both sides of the exact identity for Laplacian(d0 v) / v. The left side uses
/// the product rule with a finite-difference Laplacian and gradient of d0 and
/// analytic grad log v and Laplacian v / v, so v itself is never formed.
struct DeficitLaplacian {
    LiftEval at;
    double lhs;            // Laplacian(d0 v) / v
    double b_term;         // (m / b^2) |B|^2
    double rhs;            // full right-hand side of the identity
    double shifted_residual; // the same identity restated for d = d0 + 2m
};

/// x step `step`, r step step * min(1, r / sqrt(N)).
DeficitLaplacian deficit_laplacian(const GaussianMixture& mix, const LiftPoint& p, double step);

/// lhs - rhs of the exact identity; pure finite-difference error. Restricted to
/// 7 <= N <= 200 where the stencil is well conditioned.
double dfct_residual(const GaussianMixture& mix, const LiftPoint& p, double step);

struct KeyResiduals {
    double key1;  // Laplacian(d0 v)/v - (m / b^2) |B|^2
    double key3;  // Laplacian(d0 v)/v - 8 tau |F|^2, i.e. + 4 Box(D0 u)/u
    double lhs;
    double b_term;
    double f_term;  // 8 tau |F|^2 at (x, tau)
};

KeyResiduals key_residuals(const GaussianMixture& mix, const LiftPoint& p, double step);

/// 1e-3, the x step used by the rate suites.
inline constexpr double kDefaultLiftStep = 1e-3;

}  // namespace deficit
