#include "fracshrink/curvature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fracshrink/errors.hpp"
#include "quadrature.hpp"

namespace fracshrink {

Estimate ball_curvature_constant(const KernelParams& p, const QuadratureConfig& q) {
    q.validate();
    // At x_1 the unit ball has sign -1 on (0, 1) and +1 outside. Shells at
    // 1 -/+ d are paired for d < cutoff; the remainder splits into a ball and
    // a complement integral.
    const double c = q.pairing_cutoff;
    const Estimate paired = paired_shell_integral(p, 1.0, 0.0, c, q);
    const Estimate inner = ball_kernel_integral(p, 1.0, 1.0 - c, q);
    const Estimate outer = complement_kernel_integral(p, 1.0, 1.0 + c, q);
    Estimate k{outer.value - paired.value - inner.value,
               outer.error + paired.error + inner.error};
    if (!(k.value > 0.0)) throw NumericalError("ball curvature constant came out non-positive");
    return k;
}

double merging_constant(const KernelParams& p) {
    if (p.n() < 2) throw DomainError("the merging-spheres constant needs n >= 2");
    const int n = p.n();
    return (n - 1) * unit_ball_volume(n - 1) * 0.5 *
           std::beta(0.5 * (n - 1), 0.5 * (p.s() + 1.0));
}

double merging_constant_by_quadrature(const KernelParams& p, const QuadratureConfig& q) {
    if (p.n() < 2) throw DomainError("the merging-spheres constant needs n >= 2");
    q.validate();
    const int n = p.n();
    const double s = p.s();
    // p = tan(phi) maps the half line onto [0, pi/2]:
    // \int_0^{pi/2} sin^{n-2}(phi) cos^s(phi) dphi.
    auto integrand = [n, s](double phi) {
        return std::pow(std::sin(phi), n - 2) * std::pow(std::cos(phi), s);
    };
    const Estimate e =
        detail::tanh_sinh(integrand, 0.0, 0.5 * std::numbers::pi, q.rel_tol * 0.01, 15);
    return (n - 1) * unit_ball_volume(n - 1) * e.value;
}

CurvatureEvaluator::CurvatureEvaluator(const KernelParams& p, const QuadratureConfig& q)
    : params_(p), config_(q), k_(ball_curvature_constant(p, q)) {}

CurvatureValue CurvatureEvaluator::at(const RadialSet& set, std::size_t i) const {
    if (i >= set.size())
        throw DomainError("boundary index " + std::to_string(i) + " out of range for " +
                          std::to_string(set.size()) + " radii");
    set.check_separation();

    const double s = params_.s();
    const double ri = set.radius(i);
    CurvatureValue out;
    // Relative to the ball B_{r_i} (or its complement at an inner boundary) the
    // set differs by +-2 on whole shells away from r_i; each jump of the sign
    // function at r_j contributes one ball or complement kernel mass.
    const double core = set.orientation(i) * k_.value / std::pow(ri, s);
    out.decomposition.push_back({"ball-core", core});
    out.error_estimate = k_.error / std::pow(ri, s);

    for (std::size_t j = 0; j < set.size(); ++j) {
        if (j == i) continue;
        const double rj = set.radius(j);
        if (j < i) {
            const Estimate b = ball_kernel_integral(params_, ri, rj, config_);
            const double term = -2.0 * set.orientation(j) * b.value;
            out.decomposition.push_back({"ball-correction(" + std::to_string(j) + ")", term});
            out.error_estimate += 2.0 * b.error;
        } else {
            const Estimate c = complement_kernel_integral(params_, ri, rj, config_);
            const double term = 2.0 * set.orientation(j) * c.value;
            out.decomposition.push_back(
                {"complement-correction(" + std::to_string(j) + ")", term});
            out.error_estimate += 2.0 * c.error;
        }
    }
    for (const auto& term : out.decomposition) out.value += term.value;
    return out;
}

std::vector<double> CurvatureEvaluator::all(const RadialSet& set) const {
    std::vector<double> h(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) h[i] = at(set, i).value;
    return h;
}

CurvatureValue fractional_curvature(const KernelParams& p, const RadialSet& set, std::size_t i,
                                    const QuadratureConfig& q) {
    return CurvatureEvaluator(p, q).at(set, i);
}

double annulus_inner_curvature_asymptotic(const KernelParams& p, double r,
                                          const QuadratureConfig& q) {
    if (p.n() < 2) throw DomainError("annulus asymptotic model needs n >= 2");
    if (!(r > 0.0 && r < 1.0)) throw DomainError("annulus inner radius must lie in (0, 1)");
    const double s = p.s();
    const double k = ball_curvature_constant(p, q).value;
    const double c = merging_constant(p);
    return k / std::pow(r, s) + 2.0 * c / s * (std::pow(1.0 - r, -s) - std::pow(r, -s));
}

}  // namespace fracshrink
