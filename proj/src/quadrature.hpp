#pragma once

// Internal quadrature building blocks: a QAG-style globally adaptive
// Gauss-Kronrod integrator over prescribed panels, geometric panel grading
// toward near-singular points, and a tanh-sinh wrapper.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fracshrink/errors.hpp"
#include "fracshrink/kernel_geometry.hpp"

namespace fracshrink::detail {

struct Panel {
    double a;
    double b;
    double value;
    double error;
};

/// 21-point Kronrod rule with a QUADPACK-style error estimate.
Panel gauss_kronrod_21(const std::function<double(double)>& f, double a, double b);

/// Globally adaptive integration over [b_0, b_1] u [b_1, b_2] u ...; bisects the
/// panel with the largest error until the total meets
/// max(abs_tol, rel_tol * |value|) or `max_subdivisions` bisections were spent.
/// Never throws on budget exhaustion; the returned error tells the caller.
Estimate adaptive_gauss_kronrod(const std::function<double(double)>& f,
                                std::span<const double> breakpoints, double rel_tol,
                                double abs_tol, int max_subdivisions);

/// Breakpoints for [a, b] graded geometrically away from a singularity lying
/// `scale` beyond the left (or right) endpoint; panel lengths double with distance.
std::vector<double> graded_breakpoints(double a, double b, bool pole_at_left, double scale);

inline bool within(const Estimate& e, double rel_tol, double abs_tol) {
    return e.error <= std::max(abs_tol, rel_tol * std::abs(e.value));
}

/// Throws ToleranceNotMet unless `e` meets the tolerance (with `slack`).
void require_tolerance(const Estimate& e, double rel_tol, double abs_tol, const char* what,
                       double slack = 10.0);

/// tanh-sinh over a finite interval, one integrator per thread.
template <class F>
Estimate tanh_sinh(F&& f, double a, double b, double rel_tol, int max_refinements) {
    thread_local boost::math::quadrature::tanh_sinh<double> integrator(
        static_cast<std::size_t>(std::clamp(max_refinements, 4, 20)));
    double err = 0.0;
    double l1 = 0.0;
    const double v = integrator.integrate(std::forward<F>(f), a, b, rel_tol, &err, &l1);
    return {v, err};
}

}  // namespace fracshrink::detail
