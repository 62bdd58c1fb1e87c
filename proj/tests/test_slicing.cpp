#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "deficit/error.hpp"
#include "deficit/quadrature.hpp"
#include "deficit/slicing.hpp"
#include "deficit/sweep.hpp"
#include "test_support.hpp"

using namespace deficit;
using testing_support::corpus;
using testing_support::vec;

namespace {

// c(N) = omega_{N-1} / omega_{N-2} = sqrt(pi) Gamma((N-1)/2) / Gamma(N/2), from the C library.
double log_c_oracle(long long N) {
    const double h = static_cast<double>(N);
    return 0.5 * std::log(std::numbers::pi) + std::lgamma(0.5 * (h - 1)) - std::lgamma(0.5 * h);
}

// Integration by parts gives, with no approximation,
//   mu = 1 / (4 c R) * int (r^2 - rbar^2) sin^{N-3}(theta(r)) dr,
// and t = rbar^2 / r + r turns this into
//   mu = 1 / (2 c R) * int_{2 rbar}^{2R} t sqrt(t^2 / 4 - rbar^2) (1 - t^2 / (8 N tau))^{(N-3)/2} dt.
// Both are evaluated relative to sin^{N-3} at r = rbar, whose log is returned in `log_scale`.
struct MassOracles {
    double log_scale;
    double r_form;
    double t_form;
};

MassOracles mass_oracles(const SliceGeometry& g) {
    const double e = 0.5 * static_cast<double>(g.N - 3);
    const double peak = 1.0 - g.rbar2 / (g.R * g.R);  // sin^2 at r = rbar
    const double log_peak = std::log(peak);
    QuadratureSpec spec;
    spec.rel_tol = 1e-12;
    spec.abs_tol = 1e-300;
    const auto r_integrand = [&](double r) {
        const double omc = (g.s - r + g.R) * (g.s + r - g.R) / (2 * g.R * r);
        const double s2 = omc * (2 - omc);
        if (!(s2 > 0.0)) return 0.0;
        return (r * r - g.rbar2) * std::exp(e * (std::log(s2) - log_peak));
    };
    const double w = 12.0 * std::sqrt(g.tau);  // the weight is a Gaussian of width O(sqrt(tau)) in r
    const double rb = std::sqrt(g.rbar2);
    std::vector<double> bp{g.lower()};
    for (double o : {-4 * w, -w, 0.0, w, 4 * w}) {
        const double p = rb + o;
        if (p > g.lower() && p < g.upper()) bp.push_back(p);
    }
    bp.push_back(g.upper());
    std::sort(bp.begin(), bp.end());
    const double r_form = integrate_1d(r_integrand, bp, spec).value;

    const auto t_integrand = [&](double t) {
        const double q = 0.25 * t * t - g.rbar2;
        if (!(q > 0.0)) return 0.0;
        const double base = 1.0 - t * t / (8.0 * static_cast<double>(g.N) * g.tau);
        return t * std::sqrt(q) * std::exp(e * (std::log(base) - log_peak));
    };
    std::vector<double> tb{2 * rb};
    for (double o : {w, 4 * w}) {
        if (2 * rb + o < 2 * g.R) tb.push_back(2 * rb + o);
    }
    tb.push_back(2 * g.R);
    const double t_form = integrate_1d(t_integrand, tb, spec).value;
    return {e * log_peak, r_form, t_form};
}

}  // namespace

TEST_CASE("slice geometry") {
    const auto centered = slice_geometry(1, 100, 1.0, 0.9, vec({0.0}));
    CHECK(centered.R == doctest::Approx(std::sqrt(200.0)).epsilon(1e-15));
    CHECK(centered.s == doctest::Approx(0.9 * std::sqrt(200.0)).epsilon(1e-15));
    CHECK(centered.rbar == doctest::Approx(std::sqrt(200.0) * std::sqrt(1 - 0.81)).epsilon(1e-14));

    const auto g = slice_geometry(1, 100, 1.0, 0.9, vec({0.5}));
    const double R = std::sqrt(200.0);
    const double rho = 0.9 * R;
    const double s = std::sqrt(rho * rho - 0.25);
    CHECK(g.m == 101.0);
    CHECK(g.rho == doctest::Approx(rho).epsilon(1e-15));
    CHECK(g.s == doctest::Approx(s).epsilon(1e-14));
    CHECK(g.rbar == doctest::Approx(std::sqrt(R * R - s * s)).epsilon(1e-12));
    CHECK(g.rbar2 == doctest::Approx(200.0 * 0.19 + 0.25).epsilon(1e-14));
    CHECK(g.lower() == doctest::Approx(R - s).epsilon(1e-15));

    const auto tangent = slice_geometry(1, 100, 1.0, 0.9, vec({rho}));
    CHECK(tangent.degenerate);
    CHECK(tangent.s == 0.0);
    CHECK(tangent.rbar == doctest::Approx(R).epsilon(1e-14));

    CHECK_THROWS_AS(slice_geometry(1, 100, 1.0, 0.9, vec({rho * 1.001})), Error);
    CHECK_THROWS_AS(slice_geometry(1, 100, 1.0, 1.0, vec({0.0})), Error);
    CHECK_THROWS_AS(slice_geometry(1, 100, 1.0, 0.0, vec({0.0})), Error);
    CHECK_THROWS_AS(slice_geometry(1, 6, 1.0, 0.5, vec({0.0})), Error);
    CHECK_THROWS_AS(slice_geometry(1, 100, -1.0, 0.5, vec({0.0})), Error);
}

TEST_CASE("slice weight vanishes only at the ends") {
    for (long long N : {7LL, 100LL, 10000LL, 1000000LL}) {
        const CapFractionTable cap(N);
        for (double beta : {0.5, 0.9, 0.99}) {
            for (double xr : {0.0, 0.3, 0.9}) {
                const auto g0 = slice_geometry(2, N, 0.7, beta, Vector::Zero(2));
                Vector x(2);
                x << xr * g0.rho * 0.6, xr * g0.rho * 0.8;
                const auto g = slice_geometry(2, N, 0.7, beta, x);
                if (g.degenerate) continue;
                CHECK(std::abs(slice_weight(g, g.lower())) <= 1e-12);
                CHECK(std::abs(slice_weight(g, g.upper())) <= 1e-12);
                // h itself may underflow to 0 in the interior; its log may not.
                const double rb = std::sqrt(g.rbar2);
                const double mid = rb > g.lower() ? rb : 0.5 * (g.lower() + g.upper());
                CHECK(std::isfinite(log_slice_weight(g, cap, mid)));
                CHECK(slice_weight(g, mid) >= 0.0);
                CHECK_THROWS_AS(slice_weight(g, g.upper() * (1 + 1e-9)), Error);
            }
        }
    }
}

TEST_CASE("at r = rbar the cap angle has cosine rbar / R") {
    const auto g = slice_geometry(1, 50, 1.0, 0.8, vec({0.7}));
    const double rb = std::sqrt(g.rbar2);
    REQUIRE(rb > g.lower());
    const CapFractionTable cap(g.N);
    const double theta = std::acos(rb / g.R);
    CHECK(std::abs(std::exp(log_slice_weight(g, cap, rb)) - rb * cap.value(theta)) <= 1e-12 * rb);
}

TEST_CASE("total mass: quadrature, two exact reformulations and the asymptotic form agree") {
    for (long long N : {100LL, 1000LL, 10000LL}) {
        for (double xr : {0.0, 0.5}) {
            const auto g = slice_geometry(1, N, 1.0, 0.9, vec({xr}));
            const double log_quad = log_total_mass(g, MassMode::Quadrature);
            const double log_asym = log_total_mass(g, MassMode::Asymptotic);
            const MassOracles o = mass_oracles(g);
            const double log_c = log_c_oracle(N);
            const double log_r = o.log_scale + std::log(o.r_form) - std::log(4 * g.R) - log_c;
            const double log_t = o.log_scale + std::log(o.t_form) - std::log(2 * g.R) - log_c;
            CHECK(std::abs(log_quad - log_r) < 1e-8);
            CHECK(std::abs(log_quad - log_t) < 1e-8);
            // The asymptotic form differs from the exact mass by exactly sqrt(2 pi / N) / c.
            const double exact_factor = 0.5 * std::log(2 * std::numbers::pi / N) - log_c;
            CHECK(std::abs(log_quad - (log_asym + exact_factor)) < 1e-8);
        }
    }
}

TEST_CASE("total mass: relative gap of the asymptotic form is O(1/N)") {
    std::vector<RatePoint> pts;
    for (long long N : {100LL, 1000LL, 10000LL}) {
        const auto g = slice_geometry(1, N, 1.0, 0.9, vec({0.0}));
        const double gap = std::abs(std::expm1(log_total_mass(g, MassMode::Quadrature) -
                                               log_total_mass(g, MassMode::Asymptotic)));
        CHECK(static_cast<double>(N) * gap < 1.0);
        pts.emplace_back(static_cast<double>(N), gap);
    }
    CHECK(std::abs(fit_rate(pts).slope + 1.0) < 0.15);
}

TEST_CASE("total mass is positive and shrinks to zero with the slice") {
    const double R = std::sqrt(2.0 * 100);
    const double rho = 0.9 * R;
    double previous = INFINITY;
    for (double frac : {0.5, 0.9, 0.99, 0.9999, 0.999999}) {
        const auto g = slice_geometry(1, 100, 1.0, 0.9, vec({frac * rho}));
        const double mu = total_mass(g, MassMode::Quadrature);
        CHECK(mu > 0.0);
        CHECK(mu < previous);
        previous = mu;
    }
    CHECK(previous < 1e-6);
    CHECK(total_mass(slice_geometry(1, 100, 1.0, 0.9, vec({rho})), MassMode::Quadrature) == 0.0);
}

TEST_CASE("H(x, N) obeys its Gaussian domination bound") {
    // H = sqrt(pi tau) beta^{3-N} mu_asym <= exp(-|x|^2 / (8 beta^2 tau)) 2^{7/2} sqrt(pi) beta^3 tau^{3/2}.
    for (long long N : {7LL, 10LL, 100LL, 10000LL}) {
        for (double tau : {0.5, 2.0}) {
            for (double beta : {0.6, 0.95}) {
                for (double xr : {0.0, 0.4, 0.8}) {
                    const double rho = beta * std::sqrt(2.0 * N * tau);
                    const auto g = slice_geometry(1, N, tau, beta, vec({xr * rho}));
                    const double log_H = 0.5 * std::log(std::numbers::pi * tau) - (N - 3.0) * std::log(beta) +
                                         log_total_mass(g, MassMode::Asymptotic);
                    const double x2 = xr * xr * rho * rho;
                    const double log_bound = -x2 / (8 * beta * beta * tau) + 3.5 * std::numbers::ln2 +
                                             0.5 * std::log(std::numbers::pi) + 3 * std::log(beta) +
                                             1.5 * std::log(tau);
                    CHECK(log_H <= log_bound);
                }
            }
        }
    }
}

TEST_CASE("concentration of the radial profile") {
    const auto k = GaussianMixture::standard_kernel(1);
    for (double beta : {0.9, 0.95, 0.99}) {
        double previous = INFINITY;
        for (long long N : {100LL, 1000LL, 10000LL, 100000LL}) {
            const auto p = radial_profile_integral(slice_geometry(1, N, 1.0, beta, vec({0.0})), k);
            CHECK(p.concentration_gap < previous);
            previous = p.concentration_gap;
            if (N == 10000 && beta == 0.99) CHECK(p.concentration_gap < 0.02);
        }
        // N * gap settles to a beta-dependent constant.
        const double g4 = radial_profile_integral(slice_geometry(1, 10000, 1.0, beta, vec({0.0})), k).concentration_gap;
        const double g5 =
            radial_profile_integral(slice_geometry(1, 100000, 1.0, beta, vec({0.0})), k).concentration_gap;
        MESSAGE("beta=" << beta << " N*gap at 1e4, 1e5: " << 1e4 * g4 << ", " << 1e5 * g5);
        CHECK(std::abs(1e5 * g5 / (1e4 * g4) - 1.0) < 0.05);
    }
    // A single kernel with a huge time offset is flat in t, so the profile factorizes.
    const GaussianMixture flat(1, {{1.0, vec({0.0}), 1e8}});
    const auto p = radial_profile_integral(slice_geometry(1, 1000, 1.0, 0.9, vec({0.5})), flat);
    CHECK(p.concentration_gap < 1e-8);
    CHECK(std::abs(p.log_integral - (p.log_mass + p.log_u_bar)) < 1e-8);
}

TEST_CASE("exact anchor R^{m-2} v(zbar) = tau^{n/2} u(0, tau)") {
    for (const char* stem : testing_support::kCorpus) {
        const auto mix = corpus(stem);
        const int n = mix.dimension();
        for (double tau : {0.5, 1.3}) {
            const double expected = std::pow(tau, 0.5 * n) * mix.density(Vector::Zero(n), tau);
            for (long long N : {10LL, 1000LL, 1000000LL}) {
                CHECK(std::abs(exact_anchor(mix, N, tau) - expected) <= 1e-12 * expected);
            }
        }
    }
}

TEST_CASE("elliptic target") {
    const auto off = corpus("offset_kernel");  // center 0.5, offset 1
    const auto t = elliptic_limit_target(off, 1.0);
    const double closed = std::exp(-0.25 / 8.0) / std::sqrt(8.0 * std::numbers::pi);
    CHECK(std::abs(t.closed_form - closed) < 1e-14);
    CHECK(std::abs(t.quadrature - closed) <= 1e-9 * closed);
    const GaussianMixture centered(1, {{1.0, vec({0.0}), 1.0}});
    const double c1 = elliptic_limit_target(centered, 1.0).closed_form;
    CHECK(std::abs(c1 - 1.0 / std::sqrt(8.0 * std::numbers::pi)) < 1e-15);
    CHECK(std::abs(c1 - 0.19947114020071635) < 1e-15);
    // Increasing in tau for the centered kernel with offset, and tending to 0 as tau -> 0.
    double previous = 0.0;
    for (double tau : {1e-6, 1e-3, 0.1, 1.0, 10.0}) {
        const double v = elliptic_limit_target(centered, tau).closed_form;
        CHECK(v > previous);
        previous = v;
    }
    CHECK(elliptic_limit_target(centered, 1e-6).closed_form < 1e-3);
    for (const char* stem : {"offset_kernel", "bimodal", "skewed", "planar"}) {
        const auto e = elliptic_limit_target(corpus(stem), 0.8);
        CHECK(std::abs(e.quadrature - e.closed_form) <= 1e-9 * e.closed_form);
    }
    CHECK_THROWS_AS(elliptic_limit_target(GaussianMixture::standard_kernel(1), 1.0), Error);
}

TEST_CASE("sliced average approaches the anchor at rate 1/N") {
    const auto k = GaussianMixture::standard_kernel(1);
    const double anchor = exact_anchor(k, 100, 1.0);
    double previous = INFINITY;
    std::vector<RatePoint> pts;
    for (long long N : {100LL, 1000LL, 10000LL}) {
        const double v = sliced_average(k, N, 1.0, 0.98);
        const double gap = std::abs(v - anchor);
        // The kernel is approached from below.
        CHECK(v < anchor);
        CHECK(gap < previous);
        previous = gap;
        pts.emplace_back(static_cast<double>(N), gap);
    }
    CHECK(std::abs(fit_rate(pts).slope + 1.0) < 0.1);
}

TEST_CASE("sliced average regression on the bimodal mixture") {
    const auto mix = corpus("bimodal");
    const double v = sliced_average(mix, 10000, 1.0, 0.99);
    CHECK(std::abs(v - 1.083587881734749e-01) <= 1e-8 * v);
    CHECK(std::abs(v - exact_anchor(mix, 10000, 1.0)) < 1e-5);
    SlicedAverageOptions capped;
    capped.max_N = 1000;
    CHECK_THROWS_AS(sliced_average(mix, 10000, 1.0, 0.99, capped), Error);
    CHECK_THROWS_AS(sliced_average(mix, 20000, 1.0, 0.99), Error);
}
