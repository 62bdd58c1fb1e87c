#pragma once

#include "deficit/heat_model.hpp"

namespace deficit {

/// The parabolic deficit D0 = t (|grad f|^2 + f_t) + (t f)_t and the trace-free
/// Hessian F = Hess f - I / (2t) at one point.
struct ParabolicEval {
    double D0;
    Vector grad_D0;
    double F_norm2;     // |F|^2, Frobenius
    double box_D0_rhs;  // -2 <grad D0, grad f> - 2 t |F|^2, the predicted (d_t - Laplacian) D0
};

ParabolicEval parabolic_eval(const GaussianMixture& mix, const Vector& x, double t);
ParabolicEval parabolic_eval(const FJet& jet, double t);

struct BoxResidual {
    /// [FD d_t D0 - FD Laplacian D0] - box_D0_rhs
    double scalar;
    /// FD (d_t - Laplacian)(D0 u) + 2 t |F|^2 u
    double weighted;
};

/// Central-difference check of the evolution of D0, with the same step in t
/// and in every x direction. StepTooLarge when step > t/2.
BoxResidual box_d0_residual(const GaussianMixture& mix, const Vector& x, double t, double step);

/// 1e-3 * min(t, 1).
double default_box_step(double t);

}  // namespace deficit
