#include "deficit/heat_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "deficit/error.hpp"

namespace deficit {

namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr int kMaxComponents = 64;

void check_time(const GaussianMixture& mix, double t) {
    if (!std::isfinite(t)) throw Error(ErrorKind::NonPositiveTime, "time must be finite");
    for (const auto& c : mix.components()) {
        if (!(t + c.time_offset > 0.0)) {
            throw Error(ErrorKind::NonPositiveTime, "t + t_i must be positive for every component");
        }
    }
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

GaussianMixture::GaussianMixture(int n, std::vector<MixtureComponent> components)
    : n_(n), components_(std::move(components)) {
    if (n_ < 1 || n_ > kMaxDim) throw Error(ErrorKind::DomainError, "mixture dimension must be 1, 2 or 3");
    if (components_.empty()) throw Error(ErrorKind::DomainError, "mixture needs at least one component");
    if (components_.size() > kMaxComponents) throw Error(ErrorKind::DomainError, "too many mixture components");
    double total = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
            throw Error(ErrorKind::DomainError, "mixture weights must be positive");
        }
        if (!(c.time_offset >= 0.0) || !std::isfinite(c.time_offset)) {
            throw Error(ErrorKind::DomainError, "time offsets must be >= 0");
        }
        if (c.center.size() != n_ || !c.center.allFinite()) {
            throw Error(ErrorKind::DomainError, "component center has the wrong dimension");
        }
        total += c.weight;
    }
    if (std::abs(total - 1.0) > kWeightSumTol) {
        throw Error(ErrorKind::DomainError, "mixture weights must sum to 1");
    }
}

GaussianMixture GaussianMixture::standard_kernel(int n) {
    if (n < 1 || n > kMaxDim) throw Error(ErrorKind::DomainError, "mixture dimension must be 1, 2 or 3");
    return GaussianMixture(n, {{1.0, Vector::Zero(n), 0.0}});
}

double GaussianMixture::min_time_offset() const noexcept {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : components_) m = std::min(m, c.time_offset);
    return m;
}

GaussianMixture GaussianMixture::translated(const Vector& shift) const {
    if (shift.size() != n_) throw Error(ErrorKind::DomainError, "shift has the wrong dimension");
    auto comps = components_;
    for (auto& c : comps) c.center += shift;
    return GaussianMixture(n_, std::move(comps));
}

double GaussianMixture::log_density(const Vector& x, double t) const {
    check_time(*this, t);
    double top = -std::numeric_limits<double>::infinity();
    std::array<double, kMaxComponents> lg{};
    for (std::size_t i = 0; i < components_.size(); ++i) {
        const auto& c = components_[i];
        const double s = t + c.time_offset;
        lg[i] = std::log(c.weight) - 0.5 * n_ * std::log(4.0 * std::numbers::pi * s) -
                (x - c.center).squaredNorm() / (4.0 * s);
        top = std::max(top, lg[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < components_.size(); ++i) sum += std::exp(lg[i] - top);
    return top + std::log(sum);
}

double GaussianMixture::density(const Vector& x, double t) const { return std::exp(log_density(x, t)); }

Box GaussianMixture::support_box(double t, double sigmas) const {
    check_time(*this, t);
    Vector lo = Vector::Constant(n_, std::numeric_limits<double>::infinity());
    Vector hi = Vector::Constant(n_, -std::numeric_limits<double>::infinity());
    for (const auto& c : components_) {
        const double w = sigmas * std::sqrt(2.0 * (t + c.time_offset));
        lo = lo.cwiseMin(c.center - Vector::Constant(n_, w));
        hi = hi.cwiseMax(c.center + Vector::Constant(n_, w));
    }
    return {0.5 * (lo + hi), 0.5 * (hi - lo)};
}

std::vector<std::vector<double>> GaussianMixture::breakpoints(double t) const {
    check_time(*this, t);
    std::vector<std::vector<double>> out(n_);
    for (const auto& c : components_) {
        const double sigma = std::sqrt(2.0 * (t + c.time_offset));
        for (int axis = 0; axis < n_; ++axis) {
            for (double k : {-6.0, -3.0, -1.5, 0.0, 1.5, 3.0, 6.0}) out[axis].push_back(c.center[axis] + k * sigma);
        }
    }
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
}

LogJet log_jet(const GaussianMixture& mix, const Vector& x, double t) {
    check_time(mix, t);
    const int n = mix.dimension();
    const auto comps = mix.components();
    const std::size_t k = comps.size();

    struct Terms {
        double lg, inv_two_s, q, e, kk;
        Vector a, grad_q, grad_e;
    };
    std::vector<Terms> terms(k);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
        const auto& c = comps[i];
        const double s = t + c.time_offset;
        const Vector d = x - c.center;
        const double d2 = d.squaredNorm();
        auto& tm = terms[i];
        tm.lg = std::log(c.weight) - 0.5 * n * std::log(4.0 * std::numbers::pi * s) - d2 / (4.0 * s);
        tm.inv_two_s = 0.5 / s;
        tm.a = -d / (2.0 * s);
        tm.q = d2 / (4.0 * s * s) - n / (2.0 * s);
        tm.e = -d2 / (2.0 * s * s * s) + n / (2.0 * s * s);
        tm.kk = 1.5 * d2 / (s * s * s * s) - n / (s * s * s);
        tm.grad_q = d / (2.0 * s * s);
        tm.grad_e = -d / (s * s * s);
        top = std::max(top, tm.lg);
    }
    double sum = 0.0;
    for (const auto& tm : terms) sum += std::exp(tm.lg - top);
    LogJet j;
    j.log_u = top + std::log(sum);

    std::vector<double> p(k);
    Vector abar = Vector::Zero(n);
    double qbar = 0.0;
    double ebar = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        p[i] = std::exp(terms[i].lg - j.log_u);
        abar += p[i] * terms[i].a;
        qbar += p[i] * terms[i].q;
        ebar += p[i] * terms[i].e;
    }
    j.grad = abar;
    j.hess = Matrix::Zero(n, n);
    j.dt = qbar;
    j.grad_dt = Vector::Zero(n);
    j.dtt = 0.0;
    j.grad_dtt = Vector::Zero(n);
    j.dttt = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& tm = terms[i];
        const Vector da = tm.a - abar;
        const double dq = tm.q - qbar;
        const double de = tm.e - ebar;
        j.hess += p[i] * (da * da.transpose());
        j.hess.diagonal().array() -= p[i] * tm.inv_two_s;
        j.grad_dt += p[i] * (tm.grad_q + dq * da);
        j.dtt += p[i] * (tm.e + dq * dq);
        j.grad_dtt += p[i] * (tm.grad_e + de * da + 2.0 * dq * tm.grad_q + dq * dq * da);
        j.dttt += p[i] * (tm.kk + 3.0 * dq * de + dq * dq * dq);
    }
    return j;
}

HeatJet heat_jet(const GaussianMixture& mix, const Vector& x, double t) {
    const LogJet l = log_jet(mix, x, t);
    HeatJet h;
    h.log_u = l.log_u;
    h.u = std::exp(l.log_u);
    h.grad_u_over_u = l.grad;
    h.hess_u_over_u = l.hess + l.grad * l.grad.transpose();
    h.u_t_over_u = l.dt;
    h.grad_u_t_over_u = l.grad_dt + l.dt * l.grad;
    h.u_tt_over_u = l.dtt + l.dt * l.dt;
    return h;
}

FJet f_jet(const GaussianMixture& mix, const Vector& x, double t) {
    if (!(t > 0.0)) throw Error(ErrorKind::NonPositiveTime, "f is defined for t > 0 only");
    const LogJet l = log_jet(mix, x, t);
    const double n = mix.dimension();
    FJet f;
    f.f = -l.log_u - 0.5 * n * std::log(t);
    f.grad_f = -l.grad;
    f.hess_f = -l.hess;
    f.f_t = -l.dt - 0.5 * n / t;
    f.f_tt = -l.dtt + 0.5 * n / (t * t);
    f.grad_f_t = -l.grad_dt;
    f.grad_f_tt = -l.grad_dtt;
    f.f_ttt = -l.dttt - n / (t * t * t);
    return f;
}

GaussianMixture parse_mixture(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    int n = 0;
    int line_no = 0;
    std::vector<MixtureComponent> comps;
    auto fail = [&](const std::string& why) {
        throw Error(ErrorKind::MixtureParse, "line " + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            const std::string key = trim(std::string_view(line).substr(0, eq));
            const std::string value = trim(std::string_view(line).substr(eq + 1));
            if (key == "n") {
                if (n != 0) fail("dimension given twice");
                std::istringstream vs(value);
                if (!(vs >> n) || !(vs >> std::ws).eof() || n < 1 || n > kMaxDim) fail("n must be 1, 2 or 3");
                continue;
            }
            if (key != "component") fail("unknown key '" + key + "'");
            line = value;
        }
        if (n == 0) fail("component listed before n");
        std::istringstream ls(line);
        std::vector<double> vals;
        std::string tok;
        while (ls >> tok) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                fail("bad number '" + tok + "'");
            }
            if (used != tok.size() || !std::isfinite(v)) fail("bad number '" + tok + "'");
            vals.push_back(v);
        }
        if (static_cast<int>(vals.size()) != n + 2) {
            fail("expected weight, " + std::to_string(n) + " coordinates and a time offset");
        }
        Vector c(n);
        for (int i = 0; i < n; ++i) c[i] = vals[1 + i];
        comps.push_back({vals[0], c, vals[n + 1]});
    }
    if (n == 0) throw Error(ErrorKind::MixtureParse, "missing n=");
    if (comps.empty()) throw Error(ErrorKind::MixtureParse, "no components");
    double total = 0.0;
    for (const auto& c : comps) total += c.weight;
    if (std::abs(total - 1.0) > kWeightSumTol) {
        throw Error(ErrorKind::MixtureParse, "weights sum to " + std::to_string(total) + ", not 1");
    }
    try {
        return GaussianMixture(n, std::move(comps));
    } catch (const Error& e) {
        throw Error(ErrorKind::MixtureParse, e.what());
    }
}

GaussianMixture load_mixture(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::MixtureParse, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_mixture(ss.str());
}

std::string format_mixture(const GaussianMixture& mix) {
    std::ostringstream out;
    out << std::setprecision(17) << "n=" << mix.dimension() << '\n';
    for (const auto& c : mix.components()) {
        out << c.weight;
        for (int i = 0; i < mix.dimension(); ++i) out << ' ' << c.center[i];
        out << ' ' << c.time_offset << '\n';
    }
    return out.str();
}

}  // namespace deficit
