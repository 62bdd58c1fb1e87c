#include "deficit/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "deficit/error.hpp"
#include "deficit/parabolic.hpp"
#include "deficit/special.hpp"

namespace deficit {

namespace {

const double kLog4Pi = std::log(4.0 * std::numbers::pi);

double integrate_at_time(const GaussianMixture& mix, double t, const IntegrandNd& f, const QuadratureSpec& spec) {
    const Box box = mix.support_box(t, spec.truncation_sigmas);
    const auto bps = mix.breakpoints(t);
    return integrate_box(f, box.center, box.half_widths, spec, bps).value;
}

void check_time_positive(double t) {
    if (!(t > 0.0)) throw Error(ErrorKind::NonPositiveTime, "entropy functionals need t > 0");
}

}  // namespace

QuadratureSpec entropy_quadrature() {
    QuadratureSpec spec;
    spec.rel_tol = 1e-12;
    spec.abs_tol = 1e-15;
    spec.max_subdivisions = 4000;
    spec.truncation_sigmas = 14.0;
    return spec;
}

double logsob_constant(int n) { return 0.5 * n * (2.0 + kLog4Pi); }

EntropyReport entropy_report(const GaussianMixture& mix, double t, const QuadratureSpec& spec) {
    check_time_positive(t);
    const int n = mix.dimension();
    const double half_n_log_t = 0.5 * n * std::log(t);
    EntropyReport rep;
    rep.t = t;
    rep.entropy = integrate_at_time(
        mix, t,
        [&](const Vector& x) {
            const double lu = mix.log_density(x, t);
            return std::exp(lu) * lu;
        },
        spec);
    rep.fisher = integrate_at_time(
        mix, t,
        [&](const Vector& x) {
            const FJet j = f_jet(mix, x, t);
            return std::exp(-j.f - half_n_log_t) * j.grad_f.squaredNorm();
        },
        spec);
    rep.D0_avg = integrate_at_time(
        mix, t,
        [&](const Vector& x) {
            const FJet j = f_jet(mix, x, t);
            return std::exp(-j.f - half_n_log_t) * parabolic_eval(j, t).D0;
        },
        spec);
    rep.S_tilde = -half_n_log_t - rep.entropy;
    rep.W = t * rep.fisher - rep.entropy - half_n_log_t;
    rep.logsob_deficit = rep.W - logsob_constant(n);
    return rep;
}

double w_derivative_predicted(const GaussianMixture& mix, double t, const QuadratureSpec& spec) {
    check_time_positive(t);
    const double half_n_log_t = 0.5 * mix.dimension() * std::log(t);
    const double integral = integrate_at_time(
        mix, t,
        [&](const Vector& x) {
            const FJet j = f_jet(mix, x, t);
            return std::exp(-j.f - half_n_log_t) * parabolic_eval(j, t).F_norm2;
        },
        spec);
    return -2.0 * t * integral;
}

WDerivative w_derivative_check(const GaussianMixture& mix, double t, double step, const QuadratureSpec& spec) {
    check_time_positive(t);
    if (!(step > 0.0) || !(step < t)) throw Error(ErrorKind::StepTooLarge, "W derivative step must lie in (0, t)");
    WDerivative out;
    const double wp = entropy_report(mix, t + step, spec).W;
    const double wm = entropy_report(mix, t - step, spec).W;
    out.fd_derivative = (wp - wm) / (2.0 * step);
    out.predicted = w_derivative_predicted(mix, t, spec);
    return out;
}

RescaledGap rescaled_density_gap(const GaussianMixture& mix, double t, const QuadratureSpec& spec) {
    check_time_positive(t);
    const int n = mix.dimension();
    const double sqrt_t = std::sqrt(t);
    const double half_n_log_t = 0.5 * n * std::log(t);
    const double log_gauss_norm = -0.5 * n * kLog4Pi;
    const IntegrandNd diff = [&](const Vector& x) {
        const double rescaled = std::exp(half_n_log_t + mix.log_density(sqrt_t * x, t));
        const double gauss = std::exp(log_gauss_norm - 0.25 * x.squaredNorm());
        return std::abs(rescaled - gauss);
    };

    // Union of the rescaled mixture support and the Gaussian's.
    const Box mb = mix.support_box(t, spec.truncation_sigmas);
    const double g_half = spec.truncation_sigmas * std::numbers::sqrt2;
    const Vector lo = (mb.center - mb.half_widths) / sqrt_t;
    const Vector hi = (mb.center + mb.half_widths) / sqrt_t;
    const Vector box_lo = lo.cwiseMin(Vector::Constant(n, -g_half));
    const Vector box_hi = hi.cwiseMax(Vector::Constant(n, g_half));
    auto bps = mix.breakpoints(t);
    for (auto& axis : bps) {
        for (double& p : axis) p /= sqrt_t;
        for (double k : {-6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0}) axis.push_back(k * std::numbers::sqrt2);
        std::sort(axis.begin(), axis.end());
    }
    QuadratureSpec l1_spec = spec;
    l1_spec.rel_tol = std::max(spec.rel_tol, 1e-9);
    l1_spec.abs_tol = std::max(spec.abs_tol, 1e-12);
    RescaledGap out;
    out.l1_gap = integrate_box(diff, 0.5 * (box_lo + box_hi), 0.5 * (box_hi - box_lo), l1_spec, bps).value;
    const double s_tilde = entropy_report(mix, t, spec).S_tilde;
    out.entropy_gap = std::abs(s_tilde - 0.5 * n * (1.0 + kLog4Pi));
    return out;
}

double log_poincare_density(int n, long long N, const Vector& x) {
    if (N < 2) throw Error(ErrorKind::DomainError, "projection needs N >= 2");
    if (x.size() != n) throw Error(ErrorKind::DomainError, "projection grid point has the wrong dimension");
    const double big = static_cast<double>(N);
    const double z = x.squaredNorm() / (2.0 * big);
    if (!(z < 1.0)) throw Error(ErrorKind::DomainError, "projection grid point outside |x|^2 < 2N");
    const double log_prefactor = -0.5 * n * std::numbers::ln2 - log_omega_ratio(n, N);
    // Exponent (N - 2) / 2: the (N - 1)-power of the y-sphere radius times the coarea factor 1 / |y|.
    return log_prefactor + 0.5 * (big - 2.0) * std::log1p(-z);
}

double poincare_projection_gap(int n, long long N, std::span<const Vector> grid) {
    const double log_gauss_norm = -0.5 * n * kLog4Pi;
    double sup = 0.0;
    for (const Vector& x : grid) {
        const double projected = std::exp(log_poincare_density(n, N, x));
        const double gauss = std::exp(log_gauss_norm - 0.25 * x.squaredNorm());
        sup = std::max(sup, std::abs(projected - gauss));
    }
    return sup;
}

}  // namespace deficit
