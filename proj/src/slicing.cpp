#include "deficit/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "deficit/error.hpp"
#include "deficit/lift.hpp"

namespace deficit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kUnderflowLog = -745.0;

// Offsets, in peak widths, at which an inner integral is pre-split.
constexpr double kPeakOffsets[] = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0};

std::vector<double> peak_partition(double a, double b, double center, double width) {
    std::vector<double> interior{center};
    for (double k : kPeakOffsets) {
        interior.push_back(center - k * width);
        interior.push_back(center + k * width);
    }
    std::sort(interior.begin(), interior.end());
    return make_partition(a, b, interior);
}

// log gamma(theta) from 1 - cos theta.
double log_cap_from_omc(const CapFractionTable& cap, double omc) {
    if (!(omc > 0.0)) return kNegInf;
    if (omc >= 2.0) return 0.0;
    const double sin2 = omc * (2.0 - omc);
    const double c = 1.0 - omc;
    return cap.log_value_sc(sin2, c * c, omc > 1.0);
}

double omc_at(const SliceGeometry& g, double r) {
    return (g.s - r + g.R) * (g.s + r - g.R) / (2.0 * g.R * r);
}

void check_r(const SliceGeometry& g, double r) {
    if (!(r >= g.lower() && r <= g.upper())) {
        throw Error(ErrorKind::DomainError, "slice radius outside [R - s, R + s]");
    }
}

double log_mass_quadrature(const SliceGeometry& g, const QuadratureSpec& spec) {
    const CapFractionTable cap(g.N);
    const auto bp = peak_partition(g.lower(), g.upper(), g.rbar, g.s / std::sqrt(static_cast<double>(g.N)));
    return integrate_log_1d([&](double r) { return log_slice_weight(g, cap, r); }, bp, spec);
}

double log_mass_asymptotic(const SliceGeometry& g, const QuadratureSpec& spec) {
    const double N = static_cast<double>(g.N);
    const double rho2 = g.rho * g.rho;
    const double x2 = g.x.squaredNorm();
    const double half_exp = 0.5 * (N - 3.0);
    const auto logf = [&](double sigma) {
        if (!(sigma > 0.0)) return kNegInf;
        const double z = (sigma * sigma + x2) / rho2;
        if (z >= 1.0) return kNegInf;
        return 2.0 * std::log(sigma) + half_exp * std::log1p(-z);
    };
    const double width = g.beta * std::sqrt(2.0 * g.tau);
    const auto bp = peak_partition(0.0, g.s, 2.0 * width, width);
    const double log_front = (N - 3.0) * std::log(g.beta) - 0.5 * std::log(std::numbers::pi * g.tau);
    return log_front + integrate_log_1d(logf, bp, spec);
}

}  // namespace

SliceGeometry slice_geometry(int n, long long N, double tau, double beta, const Vector& x) {
    if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorKind::DomainError, "beta must lie in (0, 1)");
    if (N < kMinLiftDimension) throw Error(ErrorKind::DomainError, "slicing needs N >= 7");
    if (!(tau > 0.0)) throw Error(ErrorKind::DomainError, "slicing needs tau > 0");
    if (x.size() != n || n < 1 || n > kMaxDim) throw Error(ErrorKind::DomainError, "slice point dimension mismatch");
    SliceGeometry g;
    g.n = n;
    g.N = N;
    g.tau = tau;
    g.beta = beta;
    g.x = x;
    g.m = static_cast<double>(N) + n;
    const double R2 = 2.0 * static_cast<double>(N) * tau;
    g.R = std::sqrt(R2);
    g.rho = beta * g.R;
    const double x2 = x.squaredNorm();
    const double s2 = g.rho * g.rho - x2;
    if (s2 < -1e-12 * g.rho * g.rho) throw Error(ErrorKind::DomainError, "|x| exceeds beta R");
    g.s = std::sqrt(std::max(s2, 0.0));
    g.rbar2 = R2 * (1.0 - beta) * (1.0 + beta) + x2;
    g.rbar = std::sqrt(g.rbar2);
    g.degenerate = g.s == 0.0;
    return g;
}

double log_slice_weight(const SliceGeometry& g, const CapFractionTable& cap, double r) {
    check_r(g, r);
    if (r == 0.0) return kNegInf;
    return std::log(r) + log_cap_from_omc(cap, omc_at(g, r));
}

double slice_weight(const SliceGeometry& g, double r) {
    check_r(g, r);
    const CapFractionTable cap(g.N);
    const double log_cap = log_cap_from_omc(cap, omc_at(g, r));
    if (log_cap < kUnderflowLog) return 0.0;
    return r * std::exp(log_cap);
}

double log_total_mass(const SliceGeometry& g, MassMode mode, const QuadratureSpec& spec) {
    if (g.degenerate) return kNegInf;
    return mode == MassMode::Quadrature ? log_mass_quadrature(g, spec) : log_mass_asymptotic(g, spec);
}

double total_mass(const SliceGeometry& g, MassMode mode, const QuadratureSpec& spec) {
    return std::exp(log_total_mass(g, mode, spec));
}

namespace {

RadialProfile profile_with(const SliceGeometry& g, const GaussianMixture& mix, const CapFractionTable& cap,
                           const QuadratureSpec& spec) {
    RadialProfile p;
    const double two_N = 2.0 * static_cast<double>(g.N);
    p.log_u_bar = mix.log_density(g.x, g.rbar2 / two_N);
    if (g.degenerate) {
        p.log_integral = p.log_mass = kNegInf;
        p.concentration_gap = 0.0;
        return p;
    }
    const auto bp = peak_partition(g.lower(), g.upper(), g.rbar, g.s / std::sqrt(static_cast<double>(g.N)));
    p.log_mass = integrate_log_1d([&](double r) { return log_slice_weight(g, cap, r); }, bp, spec);
    p.log_integral = integrate_log_1d(
        [&](double r) {
            const double lh = log_slice_weight(g, cap, r);
            if (lh == kNegInf) return kNegInf;
            return lh + mix.log_density(g.x, r * r / two_N);
        },
        bp, spec);
    p.concentration_gap = std::abs(std::expm1(p.log_integral - p.log_mass - p.log_u_bar));
    return p;
}

}  // namespace

RadialProfile radial_profile_integral(const SliceGeometry& g, const GaussianMixture& mix,
                                      const QuadratureSpec& spec) {
    if (g.n != mix.dimension()) throw Error(ErrorKind::DomainError, "slice and mixture dimensions differ");
    const CapFractionTable cap(g.N);
    return profile_with(g, mix, cap, spec);
}

double sliced_average(const GaussianMixture& mix, long long N, double tau, double beta,
                      const SlicedAverageOptions& options) {
    if (N > options.max_N) throw Error(ErrorKind::DomainError, "sliced_average N exceeds the configured cap");
    const int n = mix.dimension();
    const QuadratureSpec& spec = options.spec;
    const CapFractionTable cap(N);
    const double R = std::sqrt(2.0 * static_cast<double>(N) * tau);
    const double rho = beta * R;

    // log of int u h dr at base point x; the x-integral is against exp(. - L0).
    const auto log_inner = [&](const Vector& x) {
        const double x2 = x.squaredNorm();
        if (x2 >= rho * rho) return kNegInf;
        const SliceGeometry g = slice_geometry(n, N, tau, beta, x);
        const double two_N = 2.0 * static_cast<double>(N);
        const auto bp = peak_partition(g.lower(), g.upper(), g.rbar, g.s / std::sqrt(static_cast<double>(N)));
        return integrate_log_1d(
            [&](double r) {
                const double lh = log_slice_weight(g, cap, r);
                if (lh == kNegInf) return kNegInf;
                return lh + mix.log_density(x, r * r / two_N);
            },
            bp, spec);
    };
    const Vector origin = Vector::Zero(n);
    const double L0 = log_inner(origin);
    if (!std::isfinite(L0)) throw Error(ErrorKind::OverflowGuard, "inner slice integral at x = 0 is not finite");

    // The x-profile is mu(x) u(x, .) ~ exp(-|x|^2 / (4 beta^2 tau)) u(x, (1 - beta^2) tau).
    const double width = beta * std::sqrt(2.0 * tau);
    const double radius = std::min(rho, spec.truncation_sigmas * width);
    const IntegrandNd outer = [&](const Vector& x) {
        const double l = log_inner(x);
        return l == kNegInf ? 0.0 : std::exp(l - L0);
    };
    std::vector<std::vector<double>> bps(n);
    const auto mix_bp = mix.breakpoints((1.0 - beta * beta) * tau);
    for (int axis = 0; axis < n; ++axis) {
        for (double k : {-6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0}) bps[axis].push_back(k * width);
        bps[axis].insert(bps[axis].end(), mix_bp[axis].begin(), mix_bp[axis].end());
        std::sort(bps[axis].begin(), bps[axis].end());
    }
    double outer_value = 0.0;
    if (n == 1) {
        std::vector<double> interior = bps[0];
        const auto bp = make_partition(-radius, radius, interior);
        Vector x(1);
        outer_value = integrate_1d(
                          [&](double t) {
                              x[0] = t;
                              return outer(x);
                          },
                          bp, spec)
                          .value;
    } else {
        outer_value = integrate_ball(outer, origin, radius, spec, bps).value;
    }
    if (!(outer_value > 0.0)) throw Error(ErrorKind::NonConvergence, "sliced x-integral is not positive");

    const double m = static_cast<double>(N) + n;
    const double log_prefactor = -m * std::log(beta) - std::log(2.0 * tau) - 0.5 * n * std::numbers::ln2 -
                                 log_omega_ratio(n, N);
    const double log_total = log_prefactor + L0 + std::log(outer_value);
    if (!(std::abs(log_total) <= 700.0)) {
        throw Error(ErrorKind::OverflowGuard, "combined slicing prefactor is out of range");
    }
    return std::exp(log_total);
}

double exact_anchor(const GaussianMixture& mix, long long N, double tau) {
    const LiftPoint p = LiftPoint::at_tau(Vector::Zero(mix.dimension()), tau, N);
    return std::exp(-lift_eval(mix, p).f);
}

EllipticTarget elliptic_limit_target(const GaussianMixture& mix, double tau, const QuadratureSpec& spec) {
    if (!(tau > 0.0)) throw Error(ErrorKind::DomainError, "elliptic target needs tau > 0");
    for (const auto& c : mix.components()) {
        if (!(c.time_offset > 0.0)) {
            throw Error(ErrorKind::ZeroTimeComponent, "u(., 0) is singular: a component has zero time offset");
        }
    }
    const int n = mix.dimension();
    EllipticTarget out;
    out.closed_form = std::exp(0.5 * n * std::log(tau) + mix.log_density(Vector::Zero(n), tau));

    const double four_tau = 4.0 * tau;
    const IntegrandNd f = [&](const Vector& x) {
        return std::exp(mix.log_density(x, 0.0) - x.squaredNorm() / four_tau);
    };
    const Box box = mix.support_box(0.0, spec.truncation_sigmas);
    const auto bps = mix.breakpoints(0.0);
    const double integral = integrate_box(f, box.center, box.half_widths, spec, bps).value;
    out.quadrature = std::exp(-0.5 * n * std::log(4.0 * std::numbers::pi)) * integral;
    if (std::abs(out.quadrature - out.closed_form) > 1e-8 * out.closed_form) {
        throw Error(ErrorKind::NonConvergence, "elliptic target quadrature disagrees with its closed form");
    }
    return out;
}

}  // namespace deficit
