#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deficit/linalg.hpp"

namespace deficit {

struct MixtureComponent {
    double weight;
    Vector center;
    double time_offset;
};

/// Axis-aligned box used to truncate Gaussian-tailed integrals.
struct Box {
    Vector center;
    Vector half_widths;
};

/// Positive heat solution on R^n (n <= 3):
///   u(x,t) = sum_i w_i (4 pi (t + t_i))^{-n/2} exp(-|x - c_i|^2 / (4 (t + t_i))),
/// with weights summing to one so that u(., t) is a probability density.
class GaussianMixture {
public:
    /// Throws DomainError on an empty component list, a dimension outside
    /// [1, 3], a non-positive weight, a negative offset, or weights not summing
    /// to one within 1e-12.
    GaussianMixture(int n, std::vector<MixtureComponent> components);

    /// The Euclidean heat kernel (4 pi t)^{-n/2} exp(-|x|^2 / 4t).
    static GaussianMixture standard_kernel(int n);

    int dimension() const noexcept { return n_; }
    std::span<const MixtureComponent> components() const noexcept { return components_; }
    double min_time_offset() const noexcept;

    GaussianMixture translated(const Vector& shift) const;

    double log_density(const Vector& x, double t) const;
    double density(const Vector& x, double t) const;

    /// Bounding box of c_i +- sigmas * sqrt(2 (t + t_i)) over all components.
    Box support_box(double t, double sigmas) const;
    /// Per-axis breakpoints at each component center and a few standard
    /// deviations either side, for seeding adaptive quadrature.
    std::vector<std::vector<double>> breakpoints(double t) const;

private:
    int n_;
    std::vector<MixtureComponent> components_;
};

/// Derivatives of log u at (x, t), from posterior-weighted central moments of
/// the per-component derivatives. Stays finite where u itself underflows.
struct LogJet {
    double log_u;
    Vector grad;       // grad log u
    Matrix hess;       // Hess log u
    double dt;         // d/dt log u
    Vector grad_dt;    // grad d/dt log u
    double dtt;        // d2/dt2 log u
    Vector grad_dtt;   // grad d2/dt2 log u
    double dttt;       // d3/dt3 log u
};

/// Jet of u itself, with every derivative stored relative to u so that the
/// record survives underflow of u in the tails. u_t_over_u equals the trace of
/// hess_u_over_u (the heat equation).
struct HeatJet {
    double log_u;
    double u;
    Vector grad_u_over_u;
    Matrix hess_u_over_u;
    double u_t_over_u;
    Vector grad_u_t_over_u;
    double u_tt_over_u;

    Vector grad_u() const { return u * grad_u_over_u; }
    Matrix hess_u() const { return u * hess_u_over_u; }
    double u_t() const { return u * u_t_over_u; }
    Vector grad_u_t() const { return u * grad_u_t_over_u; }
    double u_tt() const { return u * u_tt_over_u; }
};

/// f = -log(t^{n/2} u) and its derivatives. The third-order entries grad_f_tt and
/// f_ttt feed the radial and spatial gradient of the lift's psi.
struct FJet {
    double f;
    Vector grad_f;
    Matrix hess_f;
    double f_t;
    double f_tt;
    Vector grad_f_t;
    Vector grad_f_tt;
    double f_ttt;
};

/// NonPositiveTime unless t + t_i > 0 for every component.
LogJet log_jet(const GaussianMixture& mix, const Vector& x, double t);
HeatJet heat_jet(const GaussianMixture& mix, const Vector& x, double t);
/// NonPositiveTime unless t > 0.
FJet f_jet(const GaussianMixture& mix, const Vector& x, double t);

/// Parses the mixture description format:
///
///     # comment
///     n=2
///     0.25  -1.0 0.0  0.5     <- weight, n center coordinates, time offset
///     component=0.75 1.0 0.0 0.5
///
/// Throws MixtureParse on malformed input or weights not summing to one
/// within 1e-12.
GaussianMixture parse_mixture(std::string_view text);
GaussianMixture load_mixture(const std::filesystem::path& path);
std::string format_mixture(const GaussianMixture& mix);

}  // namespace deficit
