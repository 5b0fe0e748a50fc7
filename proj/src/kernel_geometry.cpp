#include "fracshrink/kernel_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fracshrink/errors.hpp"
#include "quadrature.hpp"

namespace fracshrink {

KernelParams::KernelParams(int n, double s) : n_(n), s_(s) {
    if (n < 1) throw DomainError("dimension n must be >= 1, got " + std::to_string(n));
    if (!(s > 0.0 && s < 1.0))
        throw DomainError("fractional order s must lie in (0, 1), got " + std::to_string(s));
}

void QuadratureConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw DomainError("quadrature tolerances must be positive");
    if (max_subdivisions < 1) throw DomainError("max_subdivisions must be >= 1");
    if (!(pairing_cutoff > 0.0 && pairing_cutoff < 1.0))
        throw DomainError("pairing_cutoff must lie in (0, 1)");
}

QuadratureConfig QuadratureConfig::scaled(double factor) const {
    QuadratureConfig out = *this;
    out.rel_tol *= factor;
    out.abs_tol *= factor;
    return out;
}

RadialSet::RadialSet(std::vector<double> radii, bool contains_origin)
    : radii_(std::move(radii)), contains_origin_(contains_origin) {
    if (radii_.empty()) throw DomainError("radial set needs at least one radius");
    for (std::size_t i = 0; i < radii_.size(); ++i) {
        if (!(radii_[i] > 0.0) || !std::isfinite(radii_[i]))
            throw DomainError("radii must be finite and positive");
        if (i > 0 && !(radii_[i] > radii_[i - 1]))
            throw DomainError("radii must be strictly increasing");
    }
    const bool odd = radii_.size() % 2 == 1;
    if (odd != contains_origin_)
        throw DomainError(contains_origin_
                              ? "a set containing the origin needs an odd radius count"
                              : "an annuli-only set needs an even radius count");
}

RadialSet RadialSet::from_radii(std::vector<double> radii) {
    const bool odd = radii.size() % 2 == 1;
    return RadialSet(std::move(radii), odd);
}

int RadialSet::orientation(std::size_t i) const {
    if (i >= radii_.size()) throw DomainError("boundary index out of range");
    // Counting from the outermost sphere (an outer boundary) the type alternates.
    return (radii_.size() - 1 - i) % 2 == 0 ? 1 : -1;
}

int RadialSet::sign_at(double t) const {
    const auto above = static_cast<std::size_t>(
        std::upper_bound(radii_.begin(), radii_.end(), t) - radii_.begin());
    if (above == radii_.size()) return 1;
    // Just below sphere `above` the set is inside iff that sphere is an outer boundary.
    return orientation(above) == 1 ? -1 : 1;
}

RadialSet RadialSet::scaled(double lambda) const {
    if (!(lambda > 0.0)) throw DomainError("scale factor must be positive");
    std::vector<double> r = radii_;
    for (double& x : r) x *= lambda;
    return RadialSet(std::move(r), contains_origin_);
}

void RadialSet::check_separation(double guard) const {
    for (std::size_t i = 0; i + 1 < radii_.size(); ++i) {
        if ((radii_[i + 1] - radii_[i]) / radii_[i + 1] < guard)
            throw DegenerateConfiguration(
                "radii " + std::to_string(i) + " and " + std::to_string(i + 1) +
                    " are closer than the degeneracy guard",
                i);
    }
}

double unit_ball_volume(int k) {
    return std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

namespace {

// Inner angular integrals run tighter than the outer radial ones.
constexpr double kInnerTolFactor = 0.01;

double sphere_area_factor(int n) {
    // (n-1) * omega_{n-1}: measure of the unit (n-2)-sphere; 2 for n = 2.
    return (n - 1) * unit_ball_volume(n - 1);
}

Estimate angular_integral(const std::function<double(double)>& f, double theta_scale,
                          const QuadratureConfig& q) {
    const auto pts = detail::graded_breakpoints(0.0, std::numbers::pi, true, theta_scale);
    return detail::adaptive_gauss_kronrod(f, pts, q.rel_tol * kInnerTolFactor, 0.0,
                                          q.max_subdivisions);
}

// K(r, t) without argument validation.
Estimate kernel(const KernelParams& p, double r, double t, const QuadratureConfig& q) {
    const double s = p.s();
    const int n = p.n();
    const double gap = std::abs(r - t);
    if (n == 1) return {std::pow(gap, -1.0 - s) + std::pow(r + t, -1.0 - s), 0.0};

    const double nu = p.half_order();
    const double rt = r * t;
    auto integrand = [&](double theta) {
        const double h = std::sin(0.5 * theta);
        const double d2 = gap * gap + 4.0 * rt * h * h;
        const double w = n == 2 ? 1.0 : std::pow(std::sin(theta), n - 2);
        return w * std::pow(d2, -nu);
    };
    Estimate e = angular_integral(integrand, gap / std::sqrt(rt), q);
    const double factor = sphere_area_factor(n) * std::pow(t, n - 1);
    e.value *= factor;
    e.error *= factor;
    return e;
}

// K(r, r - d) - K(r, r + d), evaluated without cancellation of the d^{-(1+s)} parts.
Estimate paired_difference(const KernelParams& p, double r, double d, const QuadratureConfig& q) {
    const double s = p.s();
    const int n = p.n();
    if (n == 1) return {std::pow(2.0 * r - d, -1.0 - s) - std::pow(2.0 * r + d, -1.0 - s), 0.0};

    const double nu = p.half_order();
    const double t_plus = r + d;
    const double log_radius_ratio = std::log1p(-2.0 * d / t_plus);  // log(t_-/t_+)
    auto integrand = [&](double theta) {
        const double h = std::sin(0.5 * theta);
        const double h2 = h * h;
        const double d_plus = d * d + 4.0 * r * t_plus * h2;
        const double w = n == 2 ? 1.0 : std::pow(std::sin(theta), n - 2);
        const double f_plus = w * std::pow(t_plus, n - 1) * std::pow(d_plus, -nu);
        const double log_ratio =
            (n - 1) * log_radius_ratio - nu * std::log1p(-8.0 * r * d * h2 / d_plus);
        return f_plus * std::expm1(log_ratio);
    };
    Estimate e = angular_integral(integrand, d / std::sqrt(r * t_plus), q);
    const double factor = sphere_area_factor(n);
    e.value *= factor;
    e.error *= factor;
    return e;
}

void require_positive(double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw DomainError(std::string(name) + " must be finite and positive");
}

// Radial integral of t -> K(r, t) over [a, b] with the kernel's singular radius
// r beyond one end; inner quadrature errors are folded into the estimate.
Estimate radial_integral(const KernelParams& p, double r, double a, double b,
                         const QuadratureConfig& q) {
    const bool pole_at_left = r <= a;
    const double scale = pole_at_left ? a - r : r - b;
    double inner_error = 0.0;
    auto integrand = [&](double t) {
        const Estimate k = kernel(p, r, t, q);
        inner_error = std::max(inner_error, k.error / std::max(std::abs(k.value), 1e-300));
        return k.value;
    };
    const auto pts = detail::graded_breakpoints(a, b, pole_at_left, scale);
    Estimate e = detail::adaptive_gauss_kronrod(integrand, pts, q.rel_tol, q.abs_tol,
                                                q.max_subdivisions);
    e.error += inner_error * std::abs(e.value);
    return e;
}

}  // namespace

Estimate sphere_kernel_integral(const KernelParams& p, double r, double t,
                                const QuadratureConfig& q) {
    q.validate();
    require_positive(r, "r");
    require_positive(t, "t");
    if (r == t) throw DomainError("sphere kernel integral is singular at r == t");
    Estimate e = kernel(p, r, t, q);
    detail::require_tolerance(e, q.rel_tol, q.abs_tol, "sphere kernel integral");
    return e;
}

Estimate ball_kernel_integral(const KernelParams& p, double r, double rho,
                              const QuadratureConfig& q) {
    q.validate();
    require_positive(r, "r");
    require_positive(rho, "rho");
    if (!(rho < r)) throw DomainError("ball kernel integral needs rho < r");
    Estimate e = radial_integral(p, r, 0.0, rho, q);
    detail::require_tolerance(e, q.rel_tol, q.abs_tol, "ball kernel integral");
    return e;
}

Estimate complement_kernel_integral(const KernelParams& p, double r, double rho,
                                    const QuadratureConfig& q) {
    q.validate();
    require_positive(r, "r");
    require_positive(rho, "rho");
    if (!(rho > r)) throw DomainError("complement kernel integral needs rho > r");

    const double s = p.s();
    const int n = p.n();
    const double cutoff = std::max(10.0 * rho, std::min(rho * std::pow(q.rel_tol, -1.0 / s),
                                                        1e6 * rho));
    Estimate e = radial_integral(p, r, rho, cutoff, q);

    // Tail: the sphere average of |x_r - y|^{-(n+s)} over |y| = t expands as
    // t^{-(n+s)} (1 + a2 (r/t)^2 + O((r/t)^4)).
    const double nu = p.half_order();
    const double area = n * unit_ball_volume(n);
    const double a2 = nu * (2.0 * nu + 2.0 - n) / n;
    const double eps2 = (r / cutoff) * (r / cutoff);
    const double tail_lead = area * std::pow(cutoff, -s);
    e.value += tail_lead * (1.0 / s + a2 * eps2 / (s + 2.0));
    // |C_4^{nu}| <= (2 nu)_4 / 4! bounds the next Gegenbauer coefficient.
    const double a4_bound =
        2.0 * nu * (2.0 * nu + 1.0) * (2.0 * nu + 2.0) * (2.0 * nu + 3.0) / 24.0;
    e.error += tail_lead * a4_bound * eps2 * eps2 / (s + 4.0);

    detail::require_tolerance(e, q.rel_tol, q.abs_tol, "complement kernel integral");
    return e;
}

Estimate paired_shell_integral(const KernelParams& p, double r, double a, double b,
                               const QuadratureConfig& q) {
    q.validate();
    require_positive(r, "r");
    if (!(a >= 0.0 && a <= b && b <= r))
        throw DomainError("paired shell integral needs 0 <= a <= b <= r");
    if (a == b) return {};

    // d = u^{1/(1-s)} turns the d^{-s} endpoint behaviour into a bounded integrand.
    const double s = p.s();
    const double expo = 1.0 / (1.0 - s);
    const double d_floor = 1e-10 * r;
    double inner_error = 0.0;
    auto integrand = [&](double u) {
        const double d = std::max(std::pow(u, expo), d_floor);
        const double jac = expo * std::pow(d, s);  // dd/du = expo * u^{s/(1-s)}
        const Estimate g = paired_difference(p, r, std::min(d, b), q);
        inner_error = std::max(inner_error, g.error / std::max(std::abs(g.value), 1e-300));
        return g.value * jac;
    };
    Estimate e = detail::tanh_sinh(integrand, std::pow(a, 1.0 - s), std::pow(b, 1.0 - s),
                                   q.rel_tol * 0.1, 15);
    e.error += inner_error * std::abs(e.value);
    detail::require_tolerance(e, q.rel_tol, q.abs_tol, "paired shell integral");
    return e;
}

}  // namespace fracshrink
