#include "deficit/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "deficit/error.hpp"

namespace deficit {

namespace {

// 21-point Kronrod abscissae on [-1, 1] (positive half) with the embedded
// 10-point Gauss rule at the odd indices.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600609529223, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

// samples[0] is the midpoint; samples[1 + 2j] and samples[2 + 2j] sit at
// center -+ half * kXgk[j].
using Samples = std::array<double, 21>;

std::array<double, 21> abscissae(double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::array<double, 21> x{};
    x[0] = center;
    for (int j = 0; j < 10; ++j) {
        x[1 + 2 * j] = center - half * kXgk[j];
        x[2 + 2 * j] = center + half * kXgk[j];
    }
    return x;
}

struct RuleEstimate {
    double value;
    double error;
};

RuleEstimate apply_rule(const Samples& fv, double half) {
    const double fc = fv[0];
    double resk = kWgk[10] * fc;
    double resg = 0.0;
    double resabs = std::abs(resk);
    for (int j = 0; j < 10; ++j) {
        const double f1 = fv[1 + 2 * j];
        const double f2 = fv[2 + 2 * j];
        resk += kWgk[j] * (f1 + f2);
        resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    const double reskh = 0.5 * resk;
    double resasc = kWgk[10] * std::abs(fc - reskh);
    for (int j = 0; j < 10; ++j) {
        resasc += kWgk[j] * (std::abs(fv[1 + 2 * j] - reskh) + std::abs(fv[2 + 2 * j] - reskh));
    }
    const double ahalf = std::abs(half);
    resabs *= ahalf;
    resasc *= ahalf;
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    if (resabs > kTiny / (50.0 * kEps)) err = std::max(50.0 * kEps * resabs, err);
    return {resk * half, err};
}

void check_partition(std::span<const double> bp) {
    if (bp.size() < 2) throw Error(ErrorKind::DomainError, "integration needs at least two breakpoints");
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        if (!std::isfinite(bp[i]) || !std::isfinite(bp[i + 1]) || !(bp[i] < bp[i + 1])) {
            throw Error(ErrorKind::DomainError, "integration limits must be finite and increasing");
        }
    }
}

bool splittable(double a, double b) {
    const double mid = 0.5 * (a + b);
    return mid > a && mid < b && (b - a) > 8.0 * kEps * std::max(std::abs(a), std::abs(b));
}

struct Panel {
    double a;
    double b;
    double value;  // linear mode: integral; log mode: log integral
    double error;  // linear mode: error; log mode: log error
    bool frozen;
};

Samples sample_linear(const Integrand1d& f, double a, double b) {
    const auto x = abscissae(a, b);
    Samples fv{};
    for (int i = 0; i < 21; ++i) {
        fv[i] = f(x[i]);
        if (!std::isfinite(fv[i])) {
            throw Error(ErrorKind::NonFiniteIntegrand, "integrand not finite at x = " + std::to_string(x[i]));
        }
    }
    return fv;
}

Panel linear_panel(const Integrand1d& f, double a, double b) {
    const auto est = apply_rule(sample_linear(f, a, b), 0.5 * (b - a));
    return {a, b, est.value, est.error, false};
}

Panel log_panel(const Integrand1d& logf, double a, double b) {
    const auto x = abscissae(a, b);
    Samples lv{};
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 21; ++i) {
        lv[i] = logf(x[i]);
        if (std::isnan(lv[i]) || lv[i] == std::numeric_limits<double>::infinity()) {
            throw Error(ErrorKind::NonFiniteIntegrand,
                        "log-integrand NaN or +inf at x = " + std::to_string(x[i]));
        }
        top = std::max(top, lv[i]);
    }
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (top == kNegInf) return {a, b, kNegInf, kNegInf, false};
    Samples scaled{};
    for (int i = 0; i < 21; ++i) scaled[i] = std::exp(lv[i] - top);
    const auto est = apply_rule(scaled, 0.5 * (b - a));
    const double shift = top;
    return {a, b, shift + std::log(est.value),
            est.error > 0.0 ? shift + std::log(est.error) : kNegInf, false};
}

}  // namespace

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0.0)) throw Error(ErrorKind::DomainError, "rel_tol must be > 0");
    if (!(abs_tol > 0.0)) throw Error(ErrorKind::DomainError, "abs_tol must be > 0");
    if (max_subdivisions < 1) throw Error(ErrorKind::DomainError, "max_subdivisions must be >= 1");
    if (!(truncation_sigmas >= 6.0)) throw Error(ErrorKind::DomainError, "truncation_sigmas must be >= 6");
}

std::vector<double> make_partition(double a, double b, std::span<const double> interior) {
    std::vector<double> bp{a};
    for (double p : interior) {
        if (p > a && p < b) bp.push_back(p);
    }
    bp.push_back(b);
    std::sort(bp.begin(), bp.end());
    std::vector<double> out;
    for (double p : bp) {
        if (out.empty() || p > out.back()) out.push_back(p);
    }
    return out;
}

QuadResult integrate_1d(const Integrand1d& f, double a, double b, const QuadratureSpec& spec) {
    const std::array<double, 2> bp{a, b};
    return integrate_1d(f, bp, spec);
}

QuadResult integrate_1d(const Integrand1d& f, std::span<const double> breakpoints, const QuadratureSpec& spec) {
    spec.validate();
    check_partition(breakpoints);
    std::vector<Panel> panels;
    panels.reserve(breakpoints.size() + 64);
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        panels.push_back(linear_panel(f, breakpoints[i], breakpoints[i + 1]));
    }
    int splits = 0;
    for (;;) {
        double total = 0.0;
        double err = 0.0;
        std::size_t worst = panels.size();
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].value;
            err += panels[i].error;
            if (!panels[i].frozen && (worst == panels.size() || panels[i].error > panels[worst].error)) worst = i;
        }
        if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
            return {total, err, splits, true};
        }
        if (splits >= spec.max_subdivisions || worst == panels.size()) {
            throw Error(ErrorKind::NonConvergence,
                        "adaptive quadrature stopped after " + std::to_string(splits) +
                            " subdivisions with error " + std::to_string(err) + " on value " +
                            std::to_string(total));
        }
        Panel& p = panels[worst];
        if (!splittable(p.a, p.b)) {
            p.frozen = true;
            continue;
        }
        const double mid = 0.5 * (p.a + p.b);
        const double hi = p.b;
        p = linear_panel(f, p.a, mid);
        panels.push_back(linear_panel(f, mid, hi));
        ++splits;
    }
}

double integrate_log_1d(const Integrand1d& logf, double a, double b, const QuadratureSpec& spec) {
    const std::array<double, 2> bp{a, b};
    return integrate_log_1d(logf, bp, spec);
}

double integrate_log_1d(const Integrand1d& logf, std::span<const double> breakpoints, const QuadratureSpec& spec) {
    spec.validate();
    check_partition(breakpoints);
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    std::vector<Panel> panels;
    panels.reserve(breakpoints.size() + 64);
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        panels.push_back(log_panel(logf, breakpoints[i], breakpoints[i + 1]));
    }
    int splits = 0;
    for (;;) {
        double top = kNegInf;
        for (const auto& p : panels) top = std::max(top, p.value);
        if (top == kNegInf) return kNegInf;
        double total = 0.0;
        double err = 0.0;
        std::size_t worst = panels.size();
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += std::exp(panels[i].value - top);
            err += std::exp(panels[i].error - top);
            if (!panels[i].frozen && (worst == panels.size() || panels[i].error > panels[worst].error)) worst = i;
        }
        if (err <= spec.rel_tol * total) return top + std::log(total);
        if (splits >= spec.max_subdivisions || worst == panels.size()) {
            throw Error(ErrorKind::NonConvergence,
                        "log-domain quadrature stopped after " + std::to_string(splits) +
                            " subdivisions with relative error " + std::to_string(err / total));
        }
        Panel& p = panels[worst];
        if (!splittable(p.a, p.b)) {
            p.frozen = true;
            continue;
        }
        const double mid = 0.5 * (p.a + p.b);
        const double hi = p.b;
        p = log_panel(logf, p.a, mid);
        panels.push_back(log_panel(logf, mid, hi));
        ++splits;
    }
}

namespace {

QuadResult integrate_axis(const IntegrandNd& f, Vector& point, int axis, const Vector& center,
                          const Vector& half_widths, const QuadratureSpec& spec,
                          std::span<const std::vector<double>> breakpoints) {
    const int n = static_cast<int>(center.size());
    const double lo = center[axis] - half_widths[axis];
    const double hi = center[axis] + half_widths[axis];
    const std::vector<double> bp =
        breakpoints.empty() ? std::vector<double>{lo, hi} : make_partition(lo, hi, breakpoints[axis]);
    if (axis == n - 1) {
        return integrate_1d(
            [&](double t) {
                point[axis] = t;
                return f(point);
            },
            bp, spec);
    }
    QuadratureSpec inner = spec;
    inner.rel_tol = spec.rel_tol * 0.1;
    inner.abs_tol = spec.abs_tol * 0.1 / (hi - lo);
    double inner_err = 0.0;
    auto result = integrate_1d(
        [&](double t) {
            point[axis] = t;
            const auto r = integrate_axis(f, point, axis + 1, center, half_widths, inner, breakpoints);
            inner_err = std::max(inner_err, r.error_estimate);
            return r.value;
        },
        bp, spec);
    result.error_estimate += inner_err * (hi - lo);
    return result;
}

}  // namespace

QuadResult integrate_box(const IntegrandNd& f, const Vector& center, const Vector& half_widths,
                         const QuadratureSpec& spec, std::span<const std::vector<double>> breakpoints) {
    const auto n = center.size();
    if (n > kMaxDim) throw Error(ErrorKind::DimensionTooLarge, "box integration supports n <= 3");
    if (n < 1 || half_widths.size() != n) throw Error(ErrorKind::DomainError, "box dimensions disagree");
    if (!breakpoints.empty() && breakpoints.size() != static_cast<std::size_t>(n)) {
        throw Error(ErrorKind::DomainError, "need one breakpoint list per axis");
    }
    for (int i = 0; i < n; ++i) {
        if (!(half_widths[i] > 0.0)) throw Error(ErrorKind::DomainError, "half widths must be positive");
    }
    Vector point = center;
    return integrate_axis(f, point, 0, center, half_widths, spec, breakpoints);
}

namespace {

// Axis `axis` runs over the chord c +- rho, rho^2 the squared radius left by the
// earlier axes. Non-final axes use t = c + rho sin(theta), which removes the
// square-root endpoint behaviour of the inner chord lengths.
QuadResult integrate_chord(const IntegrandNd& f, Vector& point, int axis, const Vector& center, double rho2,
                           const QuadratureSpec& spec, std::span<const std::vector<double>> breakpoints) {
    const int n = static_cast<int>(center.size());
    const double rho = std::sqrt(std::max(rho2, 0.0));
    const double c = center[axis];
    if (!(rho > 0.0)) return {};
    const bool last = axis == n - 1;
    std::vector<double> interior;
    if (!breakpoints.empty()) {
        for (double t : breakpoints[axis]) {
            const double u = (t - c) / rho;
            if (u > -1.0 && u < 1.0) interior.push_back(last ? t : std::asin(u));
        }
        std::sort(interior.begin(), interior.end());
    }
    const double lo = last ? c - rho : -0.5 * std::numbers::pi;
    const double hi = last ? c + rho : 0.5 * std::numbers::pi;
    const std::vector<double> bp = make_partition(lo, hi, interior);
    if (last) {
        return integrate_1d(
            [&](double t) {
                point[axis] = t;
                return f(point);
            },
            bp, spec);
    }
    QuadratureSpec inner = spec;
    inner.rel_tol = spec.rel_tol * 0.1;
    inner.abs_tol = spec.abs_tol * 0.1 / (2.0 * rho);
    double inner_err = 0.0;
    auto result = integrate_1d(
        [&](double theta) {
            const double s = std::sin(theta);
            const double cth = std::cos(theta);
            point[axis] = c + rho * s;
            const auto r = integrate_chord(f, point, axis + 1, center, rho2 * cth * cth, inner, breakpoints);
            inner_err = std::max(inner_err, r.error_estimate * rho * cth);
            return r.value * rho * cth;
        },
        bp, spec);
    result.error_estimate += inner_err * std::numbers::pi;
    return result;
}

}  // namespace

QuadResult integrate_ball(const IntegrandNd& f, const Vector& center, double radius, const QuadratureSpec& spec,
                          std::span<const std::vector<double>> breakpoints) {
    const auto n = center.size();
    if (n > kMaxDim) throw Error(ErrorKind::DimensionTooLarge, "ball integration supports n <= 3");
    if (n < 1) throw Error(ErrorKind::DomainError, "ball needs a dimension");
    if (!(radius > 0.0)) throw Error(ErrorKind::DomainError, "ball radius must be positive");
    if (!breakpoints.empty() && breakpoints.size() != static_cast<std::size_t>(n)) {
        throw Error(ErrorKind::DomainError, "need one breakpoint list per axis");
    }
    Vector point = center;
    return integrate_chord(f, point, 0, center, radius * radius, spec, breakpoints);
}

}  // namespace deficit
