#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "deficit/entropy.hpp"
#include "deficit/error.hpp"
#include "deficit/sweep.hpp"
#include "test_support.hpp"

using namespace deficit;
using testing_support::corpus;
using testing_support::vec;

TEST_CASE("heat kernel is the equality case") {
    const double log4pi = std::log(4 * std::numbers::pi);
    for (int n : {1, 2}) {
        const auto k = GaussianMixture::standard_kernel(n);
        for (double t : {0.1, 1.0, 7.0}) {
            const EntropyReport r = entropy_report(k, t);
            CHECK(std::abs(r.W - 0.5 * n * (2 + log4pi)) <= 1e-9);
            CHECK(std::abs(r.logsob_deficit) <= 1e-9);
            CHECK(std::abs(r.D0_avg - 0.5 * n * log4pi) <= 1e-9);
            CHECK(std::abs(r.D0_avg - (r.W - n)) <= 1e-9);
            CHECK(std::abs(r.fisher - n / (2 * t)) <= 1e-10 * (n / (2 * t)));
        }
    }
    CHECK(std::abs(logsob_constant(1) - 2.2655121234846454) < 1e-15);
}

TEST_CASE("W - n equals the average of D0 on every mixture") {
    for (const char* stem : testing_support::kCorpus) {
        const auto mix = corpus(stem);
        for (double t : {0.1, 0.8, 12.8}) {
            const EntropyReport r = entropy_report(mix, t);
            CHECK(std::abs(r.D0_avg - (r.W - mix.dimension())) <= 1e-9);
            CHECK(r.fisher >= 0.0);
            CHECK(r.logsob_deficit >= -1e-8);
            CHECK(std::abs(r.S_tilde - (-0.5 * mix.dimension() * std::log(t) - r.entropy)) < 1e-13);
        }
    }
}

TEST_CASE("bimodal deficit regression") {
    const EntropyReport r = entropy_report(corpus("bimodal"), 0.5);
    CHECK(r.logsob_deficit > 0.0);
    CHECK(std::abs(r.logsob_deficit - 0.47123029293398844) <= 1e-9);
}

TEST_CASE("dW/dt = -2t int |Hess f - I/2t|^2 u") {
    const auto k = GaussianMixture::standard_kernel(1);
    const WDerivative wk = w_derivative_check(k, 1.0, 1e-4);
    CHECK(std::abs(wk.fd_derivative) <= 1e-9);
    CHECK(std::abs(wk.predicted) <= 1e-9);
    // A kernel started at time 1 has F = -I / (2t(t + 1)), so the rate is -n / (2 t (t + 1)^2) at time t.
    const WDerivative wo = w_derivative_check(corpus("offset_kernel"), 1.0, 1e-4);
    CHECK(std::abs(wo.predicted + 0.125) < 1e-12);
    for (const char* stem : testing_support::kCorpus) {
        const auto mix = corpus(stem);
        const WDerivative w = w_derivative_check(mix, 1.0, 1e-4);
        CHECK(std::abs(w.fd_derivative - w.predicted) <= 1e-5 * (1 + std::abs(w.predicted)));
        CHECK(w.predicted <= 0.0);
        double previous = INFINITY;
        for (int j = 0; j <= 6; ++j) {
            const double t = 0.1 * std::pow(2.0, j);
            CHECK(w_derivative_check(mix, t, 1e-4 * t).fd_derivative <= 1e-8);
            const double W = entropy_report(mix, t).W;
            CHECK(W <= previous + 1e-8);
            previous = W;
        }
    }
    CHECK_THROWS_AS(w_derivative_check(k, 1.0, 1.0), Error);
    CHECK_THROWS_AS(w_derivative_check(k, 1.0, 0.0), Error);
}

TEST_CASE("rescaled density tends to the standard Gaussian") {
    const auto k = GaussianMixture::standard_kernel(1);
    for (double t : {0.3, 1.0, 50.0}) {
        const RescaledGap g = rescaled_density_gap(k, t);
        CHECK(g.l1_gap <= 1e-12);
        CHECK(g.entropy_gap <= 1e-12);
    }
    const GaussianMixture shifted(1, {{1.0, vec({3.0}), 0.0}});
    double previous = INFINITY;
    for (double t : {1.0, 10.0, 100.0, 1000.0}) {
        const double l1 = rescaled_density_gap(shifted, t).l1_gap;
        CHECK(l1 < previous);
        previous = l1;
    }
    CHECK(previous < 0.06);
    for (const char* stem : {"offset_kernel", "skewed", "planar"}) {
        CHECK(rescaled_density_gap(corpus(stem), 1000.0).entropy_gap <= 1e-3);
    }
    const double eg = rescaled_density_gap(corpus("skewed"), 1000.0).entropy_gap;
    CHECK(std::abs(eg - 0.00035737225435594766) <= 1e-6 * eg);
    CHECK(rescaled_density_gap(corpus("bimodal"), 1000.0).entropy_gap <= 0.01);
}

TEST_CASE("Poincare projection density") {
    const auto gauss = [](int n, const Vector& x) {
        return std::pow(4 * std::numbers::pi, -0.5 * n) * std::exp(-0.25 * x.squaredNorm());
    };
    // Whole-line normalization of the projected density for moderate N.
    for (long long N : {3LL, 10LL, 200LL}) {
        const double edge = std::sqrt(2.0 * N);
        double sum = 0.0;
        const int steps = 200000;
        for (int i = 1; i < steps; ++i) {
            const double x = -edge + 2 * edge * i / steps;
            sum += std::exp(log_poincare_density(1, N, vec({x})));
        }
        CHECK(std::abs(sum * 2 * edge / steps - 1.0) < 1e-6);
    }
    std::vector<Vector> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(vec({-5.0 + 0.1 * i}));
    std::vector<RatePoint> sup, origin;
    for (long long N : {100LL, 1000LL, 10000LL, 100000LL}) {
        sup.emplace_back(static_cast<double>(N), poincare_projection_gap(1, N, grid));
        const std::vector<Vector> zero{vec({0.0})};
        const double g0 = poincare_projection_gap(1, N, zero);
        CHECK(std::abs(g0 - std::abs(std::exp(log_poincare_density(1, N, zero[0])) - gauss(1, zero[0]))) < 1e-15);
        origin.emplace_back(static_cast<double>(N), g0);
    }
    CHECK(std::abs(fit_rate(sup).slope + 1.0) < 0.1);
    CHECK(std::abs(fit_rate(origin).slope + 1.0) < 0.1);
    const std::vector<Vector> outside{vec({std::sqrt(20.0)})};
    CHECK_THROWS_AS(poincare_projection_gap(1, 10, outside), Error);
}
