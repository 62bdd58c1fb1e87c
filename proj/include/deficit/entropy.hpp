#pragma once

#include <span>

#include "deficit/heat_model.hpp"
#include "deficit/quadrature.hpp"

namespace deficit {

/// Entropy functionals of u(., t), each integrated against the closed-form jets.
struct EntropyReport {
    double t;
    double entropy;         // int u log u
    double S_tilde;         // -(n/2) log t - int u log u
    double W;               // t * fisher - int u log u - (n/2) log t
    double D0_avg;          // int D0 u, integrated independently of W
    double fisher;          // int |grad u|^2 / u
    double logsob_deficit;  // W - (n/2)(2 + log 4 pi)
};

/// Tolerances tight enough for the W - n identity to hold to 1e-9.
QuadratureSpec entropy_quadrature();

EntropyReport entropy_report(const GaussianMixture& mix, double t, const QuadratureSpec& spec = entropy_quadrature());

/// (n/2)(2 + log 4 pi), the value of W on the heat kernel and its lower bound.
double logsob_constant(int n);

struct WDerivative {
    double fd_derivative;  // (W(t + step) - W(t - step)) / (2 step)
    double predicted;      // -2 t int |Hess f - I/(2t)|^2 u
};

/// StepTooLarge unless 0 < step < t.
WDerivative w_derivative_check(const GaussianMixture& mix, double t, double step,
                               const QuadratureSpec& spec = entropy_quadrature());

/// -2 t int |F|^2 u at one time.
double w_derivative_predicted(const GaussianMixture& mix, double t, const QuadratureSpec& spec = entropy_quadrature());

struct RescaledGap {
    double l1_gap;       // int |t^{n/2} u(sqrt(t) x, t) - (4 pi)^{-n/2} e^{-|x|^2/4}| dx
    double entropy_gap;  // |S_tilde(t) - (n/2)(1 + log 4 pi)|
};

RescaledGap rescaled_density_gap(const GaussianMixture& mix, double t,
                                 const QuadratureSpec& spec = entropy_quadrature());

/// Sup over `grid` of |(2N)^{-n/2} (omega_{N-1} / omega_{m-1}) (1 - |x|^2 / 2N)^{(N-2)/2}
///                     - (4 pi)^{-n/2} e^{-|x|^2/4}|,
/// the density of the projection of the uniform measure on the radius-sqrt(2N)
/// sphere in R^{n+N} against its Gaussian limit. DomainError unless every grid
/// point has |x|^2 < 2N.
double poincare_projection_gap(int n, long long N, std::span<const Vector> grid);

/// log of the projected density at x, every factor combined in log form.
double log_poincare_density(int n, long long N, const Vector& x);

}  // namespace deficit
