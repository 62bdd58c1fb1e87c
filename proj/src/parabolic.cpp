#include "deficit/parabolic.hpp"

#include <algorithm>
#include <cmath>

#include "deficit/error.hpp"

namespace deficit {

ParabolicEval parabolic_eval(const FJet& j, double t) {
    ParabolicEval p;
    p.D0 = t * j.grad_f.squaredNorm() + 2.0 * t * j.f_t + j.f;
    p.grad_D0 = 2.0 * t * (j.hess_f * j.grad_f) + 2.0 * t * j.grad_f_t + j.grad_f;
    Matrix F = j.hess_f;
    F.diagonal().array() -= 0.5 / t;
    p.F_norm2 = F.squaredNorm();
    p.box_D0_rhs = -2.0 * p.grad_D0.dot(j.grad_f) - 2.0 * t * p.F_norm2;
    return p;
}

ParabolicEval parabolic_eval(const GaussianMixture& mix, const Vector& x, double t) {
    if (!(t > 0.0)) throw Error(ErrorKind::NonPositiveTime, "parabolic deficit needs t > 0");
    return parabolic_eval(f_jet(mix, x, t), t);
}

double default_box_step(double t) { return 1e-3 * std::min(t, 1.0); }

BoxResidual box_d0_residual(const GaussianMixture& mix, const Vector& x, double t, double step) {
    if (!(t > 0.0)) throw Error(ErrorKind::NonPositiveTime, "parabolic deficit needs t > 0");
    if (!(step > 0.0) || step > 0.5 * t) throw Error(ErrorKind::StepTooLarge, "step must lie in (0, t/2]");
    const int n = mix.dimension();
    const double log_u0 = mix.log_density(x, t);
    // D0 and D0 * u / u(x, t) at a displaced point.
    auto sample = [&](const Vector& y, double s) {
        const FJet j = f_jet(mix, y, s);
        const double d0 = parabolic_eval(j, s).D0;
        const double log_u = -j.f - 0.5 * n * std::log(s);
        return std::pair{d0, d0 * std::exp(log_u - log_u0)};
    };
    const ParabolicEval center = parabolic_eval(mix, x, t);
    const double d_c = center.D0;
    const double w_c = center.D0;  // u / u(x, t) = 1 at the center
    const auto [d_tp, w_tp] = sample(x, t + step);
    const auto [d_tm, w_tm] = sample(x, t - step);
    const double h2 = step * step;
    double lap_d = 0.0;
    double lap_w = 0.0;
    for (int i = 0; i < n; ++i) {
        Vector xp = x;
        Vector xm = x;
        xp[i] += step;
        xm[i] -= step;
        const auto [dp, wp] = sample(xp, t);
        const auto [dm, wm] = sample(xm, t);
        lap_d += (dp - 2.0 * d_c + dm) / h2;
        lap_w += (wp - 2.0 * w_c + wm) / h2;
    }
    const double dt_d = (d_tp - d_tm) / (2.0 * step);
    const double dt_w = (w_tp - w_tm) / (2.0 * step);
    BoxResidual r;
    r.scalar = (dt_d - lap_d) - center.box_D0_rhs;
    // The normalized weighted residual times u(x, t).
    r.weighted = std::exp(log_u0) * ((dt_w - lap_w) + 2.0 * t * center.F_norm2);
    return r;
}

}  // namespace deficit
