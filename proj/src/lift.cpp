#include "deficit/lift.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deficit/error.hpp"
#include "deficit/parabolic.hpp"

namespace deficit {

LiftPoint LiftPoint::at_tau(const Vector& x, double tau, long long N) {
    if (!(tau > 0.0)) throw Error(ErrorKind::DomainError, "lift point needs tau > 0");
    return LiftPoint{x, std::sqrt(2.0 * static_cast<double>(N) * tau), N};
}

void LiftPoint::validate() const {
    if (x.size() < 1 || x.size() > kMaxDim) throw Error(ErrorKind::DomainError, "lift base dimension must be 1..3");
    if (N < kMinLiftDimension) {
        throw Error(ErrorKind::DomainError, "lift dimension N must be >= 7, got " + std::to_string(N));
    }
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorKind::DomainError, "lift radius must be positive");
}

namespace {

LiftEval eval_from_jet(const FJet& j, const LiftPoint& p) {
    const int n = p.n();
    const double N = static_cast<double>(p.N);
    const double m = p.m();
    const double k = m - 2.0;
    const double r = p.r;
    const double r2 = r * r;
    const double f = j.f;

    LiftEval e;
    e.f = f;
    e.log_b = std::log(r) + f / k;
    e.log_v = -k * std::log(r) - f;

    const double E2 = std::exp(2.0 * f / k);
    const double b2 = r2 * E2;
    const double q = r2 * j.f_t / (N * k);

    // |grad b|^2 = E^2 [(1 + q)^2 + r^2 |grad f|^2 / k^2]; subtracting 1 exactly.
    e.d0 = 2.0 * m * (std::expm1(2.0 * f / k) + E2 * (q * q + 2.0 * q + r2 * j.grad_f.squaredNorm() / (k * k)));

    e.grad_log_b.resize(n + 1);
    e.grad_log_b.head(n) = j.grad_f / k;
    e.grad_log_b[n] = (1.0 + q) / r;

    e.grad_log_v.resize(n + 1);
    e.grad_log_v.head(n) = -j.grad_f;
    e.grad_log_v[n] = (2.0 - m) / r - j.f_t * r / N;

    const double zeta = j.f_t * j.f_t - j.f_tt;
    const double nn = static_cast<double>(n);
    e.lap_v_over_v = nn * (nn - 2.0) / r2 + 2.0 * (nn - 2.0) * j.f_t / N + r2 * zeta / (N * N);
    e.psi = b2 * e.lap_v_over_v;

    // psi = n(n-2) psi1 + 2(n-2) psi2 + psi3 with psi1 = b^2/r^2, psi2 = b^2 f_t / N,
    // psi3 = b^2 r^2 zeta / N^2; d/dr of a tau-function is (r/N) d/dtau.
    const double psi1 = E2;
    const double psi2 = b2 * j.f_t / N;
    const double psi3 = b2 * r2 * zeta / (N * N);
    LiftVector g_psi1 = 2.0 * psi1 * e.grad_log_b;
    g_psi1[n] -= 2.0 * psi1 / r;
    LiftVector g_psi2 = 2.0 * psi2 * e.grad_log_b;
    g_psi2.head(n) += (b2 / N) * j.grad_f_t;
    g_psi2[n] += (b2 / N) * j.f_tt * r / N;
    LiftVector g_psi3 = 2.0 * psi3 * e.grad_log_b;
    g_psi3[n] += 2.0 * psi3 / r;
    const double w3 = b2 * r2 / (N * N);
    g_psi3.head(n) += w3 * (2.0 * j.f_t * j.grad_f_t - j.grad_f_tt);
    g_psi3[n] += w3 * (r / N) * (2.0 * j.f_t * j.f_tt - j.f_ttt);
    e.grad_psi = nn * (nn - 2.0) * g_psi1 + 2.0 * (nn - 2.0) * g_psi2 + g_psi3;

    B2Hessian& h = e.hess_b2;
    h.S = b2 * (2.0 / k * j.hess_f + 4.0 / (k * k) * (j.grad_f * j.grad_f.transpose()));
    h.A = 2.0 * E2 * (1.0 + q);
    h.G = 2.0 * E2 * ((2.0 / k) * (1.0 + q) * j.grad_f + (r2 / (N * k)) * j.grad_f_t);
    h.C = 2.0 * E2 * (4.0 * q + 2.0 * q * q + r2 * r2 * j.f_tt / (N * N * k)) / r2;

    const double trS = h.S.trace();
    const double Cr2 = h.C * r2;
    e.lap_b2 = trS + N * h.A + Cr2;
    const double lambda = e.lap_b2 / m;
    // A - lambda formed directly; A and lambda agree to O(1/N).
    const double a_minus = (nn * h.A - trS - Cr2) / m;
    Matrix S_tf = h.S;
    S_tf.diagonal().array() -= lambda;
    e.B_norm2_exact = S_tf.squaredNorm() + 2.0 * r2 * h.G.squaredNorm() + N * a_minus * a_minus +
                      2.0 * a_minus * Cr2 + Cr2 * Cr2;
    return e;
}

struct FdDerivatives {
    double value;
    LiftVector grad;
    double laplacian;
};

FdDerivatives radial_fd(const ReducedFunction& g, const Vector& x, double r, long long N, double hx, double hr) {
    if (!(hx > 0.0) || !(hr > 0.0)) throw Error(ErrorKind::StepTooLarge, "finite-difference steps must be positive");
    if (!(hr < r)) throw Error(ErrorKind::StepTooLarge, "radial step must be smaller than r");
    const int n = static_cast<int>(x.size());
    FdDerivatives d;
    d.value = g(x, r);
    d.grad.resize(n + 1);
    double lap = 0.0;
    for (int i = 0; i < n; ++i) {
        Vector xp = x;
        Vector xm = x;
        xp[i] += hx;
        xm[i] -= hx;
        const double gp = g(xp, r);
        const double gm = g(xm, r);
        d.grad[i] = (gp - gm) / (2.0 * hx);
        lap += (gp - 2.0 * d.value + gm) / (hx * hx);
    }
    const double gp = g(x, r + hr);
    const double gm = g(x, r - hr);
    const double g_r = (gp - gm) / (2.0 * hr);
    d.grad[n] = g_r;
    lap += (gp - 2.0 * d.value + gm) / (hr * hr) + (static_cast<double>(N) - 1.0) / r * g_r;
    d.laplacian = lap;
    return d;
}

double check_step(double step) {
    if (!(step > 0.0) || step > 0.1) throw Error(ErrorKind::StepTooLarge, "lift step must lie in (0, 0.1]");
    return step;
}

}  // namespace

LiftEval lift_eval(const GaussianMixture& mix, const LiftPoint& p) {
    p.validate();
    if (p.n() != mix.dimension()) throw Error(ErrorKind::DomainError, "lift point dimension mismatch");
    return eval_from_jet(f_jet(mix, p.x, p.tau()), p);
}

double deficit_gap(const GaussianMixture& mix, const Vector& x, double tau, long long N) {
    const LiftPoint p = LiftPoint::at_tau(x, tau, N);
    p.validate();
    const FJet j = f_jet(mix, x, tau);
    return eval_from_jet(j, p).d0 - 4.0 * parabolic_eval(j, tau).D0;
}

double radial_laplacian_fd(const ReducedFunction& g, const Vector& x, double r, long long N, double x_step,
                           double r_step) {
    return radial_fd(g, x, r, N, x_step, r_step).laplacian;
}

double radial_laplacian_fd(const ReducedFunction& g, const Vector& x, double r, long long N, double step) {
    return radial_laplacian_fd(g, x, r, N, step, step);
}

DeficitLaplacian deficit_laplacian(const GaussianMixture& mix, const LiftPoint& p, double step) {
    check_step(step);
    DeficitLaplacian out;
    out.at = lift_eval(mix, p);
    const LiftEval& e = out.at;
    const double N = static_cast<double>(p.N);
    const double m = p.m();
    const double r_step = step * std::min(1.0, p.r / std::sqrt(N));
    const ReducedFunction d0 = [&](const Vector& y, double s) {
        return lift_eval(mix, LiftPoint{y, s, p.N}).d0;
    };
    const FdDerivatives fd = radial_fd(d0, p.x, p.r, p.N, step, r_step);

    const double L = e.lap_v_over_v;
    out.lhs = fd.laplacian + 2.0 * fd.grad.dot(e.grad_log_v) + e.d0 * L;

    const double b2 = std::exp(2.0 * e.log_b);
    const double two_m = 2.0 - m;
    const double g_dot_psi = e.grad_log_b.dot(e.grad_psi);
    out.b_term = m * e.B_norm2_exact / b2;
    out.rhs = out.b_term + 4.0 * m / two_m * g_dot_psi + (4.0 - m) * e.d0 * L / two_m + 4.0 * m * L / two_m +
              4.0 * e.psi * L / (two_m * two_m);

    const double d = e.d0 + 2.0 * m;
    const double shifted_lhs = fd.laplacian + 2.0 * two_m * e.grad_log_b.dot(fd.grad);
    const double shifted_rhs =
        out.b_term + 4.0 * m / two_m * g_dot_psi + 2.0 * d * L / two_m + 4.0 * e.psi * L / (two_m * two_m);
    out.shifted_residual = shifted_lhs - shifted_rhs;
    return out;
}

double dfct_residual(const GaussianMixture& mix, const LiftPoint& p, double step) {
    if (p.N > 200) throw Error(ErrorKind::DomainError, "dfct_residual is restricted to N <= 200");
    const DeficitLaplacian dl = deficit_laplacian(mix, p, step);
    return dl.lhs - dl.rhs;
}

KeyResiduals key_residuals(const GaussianMixture& mix, const LiftPoint& p, double step) {
    const DeficitLaplacian dl = deficit_laplacian(mix, p, step);
    const double tau = p.tau();
    KeyResiduals k;
    k.lhs = dl.lhs;
    k.b_term = dl.b_term;
    k.f_term = 8.0 * tau * parabolic_eval(mix, p.x, tau).F_norm2;
    k.key1 = dl.lhs - dl.b_term;
    k.key3 = dl.lhs - k.f_term;
    return k;
}

}  // namespace deficit
