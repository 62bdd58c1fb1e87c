#include "deficit/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "deficit/error.hpp"

namespace deficit {

namespace {

constexpr double kShift = 15.0;
constexpr double kHalfLog2Pi = 0.918938533204672741780329736406;

// Stirling series remainder log Gamma(x) - [(x - 1/2) log x - x + log(2 pi)/2], x >= 15.
double stirling_tail(double x) {
    const double z = 1.0 / x;
    const double z2 = z * z;
    return z * (1.0 / 12.0 +
                z2 * (-1.0 / 360.0 +
                      z2 * (1.0 / 1260.0 +
                            z2 * (-1.0 / 1680.0 +
                                  z2 * (1.0 / 1188.0 + z2 * (-691.0 / 360360.0 + z2 * (1.0 / 156.0)))))));
}

// Lentz evaluation of the continued fraction for I_x(a, b); converges fast for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
    constexpr double kFpMin = 1e-300;
    constexpr double kTol = 1e-16;
    const int max_iter = 1000 + static_cast<int>(20.0 * std::sqrt(a + b));
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kTol) return h;
    }
    throw Error(ErrorKind::NonConvergence, "incomplete beta continued fraction did not converge for a = " +
                                               std::to_string(a) + ", b = " + std::to_string(b) +
                                               ", x = " + std::to_string(x));
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw Error(ErrorKind::DomainError, "log_gamma needs x > 0");
    if (x >= kShift) return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + stirling_tail(x);
    double prod = 1.0;
    double y = x;
    while (y < kShift) {
        prod *= y;
        y += 1.0;
    }
    return (y - 0.5) * std::log(y) - y + kHalfLog2Pi + stirling_tail(y) - std::log(prod);
}

double log_gamma_ratio(double x, double d) {
    if (!(x > 0.0) || !(x + d > 0.0)) throw Error(ErrorKind::DomainError, "log_gamma_ratio needs x, x + d > 0");
    if (d == 0.0) return 0.0;
    double correction = 0.0;
    while (x < kShift || x + d < kShift) {
        // Gamma(x+d)/Gamma(x) = [Gamma(x+1+d)/Gamma(x+1)] * x / (x + d)
        correction -= std::log1p(d / x);
        x += 1.0;
    }
    return (x - 0.5) * std::log1p(d / x) + d * std::log(x + d) - d + stirling_tail(x + d) - stirling_tail(x) +
           correction;
}

double log_beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::DomainError, "log_beta needs a, b > 0");
    if (a < b) std::swap(a, b);
    return log_gamma(b) - log_gamma_ratio(a, b);
}

double log_incomplete_beta(double a, double b, double x, double y) {
    if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::DomainError, "incomplete beta needs a, b > 0");
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
        throw Error(ErrorKind::DomainError, "incomplete beta argument outside [0, 1]");
    }
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (x == 0.0) return kNegInf;
    if (y == 0.0) return 0.0;
    const double log_front = a * std::log(x) + b * std::log(y) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return log_front + std::log(beta_continued_fraction(a, b, x) / a);
    }
    const double tail = std::exp(log_front) * beta_continued_fraction(b, a, y) / b;
    return std::log1p(-tail);
}

double log_sphere_volume(int k) {
    if (k < 0) throw Error(ErrorKind::DomainError, "sphere dimension must be >= 0");
    const double h = 0.5 * (k + 1);
    return std::numbers::ln2 + h * std::log(std::numbers::pi) - log_gamma(h);
}

double log_omega_ratio(int n, long long N) {
    if (n < 1 || N < 2) throw Error(ErrorKind::DomainError, "omega_ratio needs n >= 1 and N >= 2");
    const double half_n = 0.5 * n;
    const double big = static_cast<double>(N);
    return half_n * std::log(std::numbers::pi * big) - log_gamma_ratio(0.5 * big, half_n);
}

double omega_ratio(int n, long long N) { return std::exp(log_omega_ratio(n, N)); }

double half_power_decay(double delta, double N) {
    if (!(N >= 2.0)) throw Error(ErrorKind::DomainError, "half_power_decay needs N >= 2");
    if (!(delta >= 0.0 && delta < N)) throw Error(ErrorKind::DomainError, "half_power_decay needs 0 <= delta < N");
    return std::exp(0.5 * N * std::log1p(-delta / N));
}

CapFractionTable::CapFractionTable(long long N) : N_(N), a_(0.5 * static_cast<double>(N - 1)), log_c_(0.0) {
    if (N < 2) throw Error(ErrorKind::DomainError, "cap fraction needs N >= 2");
    log_c_ = log_beta(a_, 0.5);
}

double CapFractionTable::log_value_sc(double sin2, double cos2, bool obtuse) const {
    const double half_log = std::log(0.5);
    if (!obtuse) return half_log + log_incomplete_beta(a_, 0.5, sin2, cos2);
    const double lower = std::exp(half_log + log_incomplete_beta(a_, 0.5, sin2, cos2));
    return std::log1p(-lower);
}

double CapFractionTable::log_value(double theta) const {
    if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
        throw Error(ErrorKind::DomainError, "cap angle outside [0, pi]");
    }
    if (theta == 0.0) return -std::numeric_limits<double>::infinity();
    if (theta == std::numbers::pi) return 0.0;
    const bool obtuse = theta > 0.5 * std::numbers::pi;
    const double acute = obtuse ? std::numbers::pi - theta : theta;
    const double s = std::sin(acute);
    const double c = std::cos(acute);
    return log_value_sc(s * s, c * c, obtuse);
}

double CapFractionTable::value(double theta) const { return std::exp(log_value(theta)); }

double CapFractionTable::log_density(double theta) const {
    if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
        throw Error(ErrorKind::DomainError, "cap angle outside [0, pi]");
    }
    if (N_ == 2) return -log_c_;
    return static_cast<double>(N_ - 2) * std::log(std::sin(theta)) - log_c_;
}

double cap_fraction(long long N, double theta) { return CapFractionTable(N).value(theta); }

}  // namespace deficit
