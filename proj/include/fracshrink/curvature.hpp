#pragma once

// Principal-value fractional mean curvature of radial sets, computed by
// pairing spherical shells symmetrically about the evaluation radius.

#include <cstddef>
#include <string>
#include <vector>

#include "fracshrink/kernel_geometry.hpp"

namespace fracshrink {

struct CurvatureTerm {
    std::string label;  // "ball-core", "ball-correction(j)", "complement-correction(j)"
    double value = 0.0;
};

struct CurvatureValue {
    double value = 0.0;
    double error_estimate = 0.0;
    std::vector<CurvatureTerm> decomposition;
};

/// k(n, s) = H_s(x_1, B_1); the ball of radius r has curvature k / r^s.
Estimate ball_curvature_constant(const KernelParams& p, const QuadratureConfig& q = {});

/// Constant c(n, s) of the merging-spheres asymptotic
/// K(r, r + d) ~ c |d|^{-(1+s)}, from the Beta-function identity. Requires n >= 2.
double merging_constant(const KernelParams& p);

/// Same constant by direct quadrature of (n-1) w_{n-1} \int_0^inf p^{n-2} (1+p^2)^{-(n+s)/2} dp.
double merging_constant_by_quadrature(const KernelParams& p, const QuadratureConfig& q = {});

/// Reuses k(n, s) across evaluations for one kernel and quadrature setting.
class CurvatureEvaluator {
public:
    CurvatureEvaluator(const KernelParams& p, const QuadratureConfig& q = {});

    const KernelParams& params() const noexcept { return params_; }
    const QuadratureConfig& config() const noexcept { return config_; }
    double ball_constant() const noexcept { return k_.value; }

    /// H_s at the sphere of radius set.radius(i).
    CurvatureValue at(const RadialSet& set, std::size_t i) const;

    /// H_s at every boundary sphere, values only.
    std::vector<double> all(const RadialSet& set) const;

private:
    KernelParams params_;
    QuadratureConfig config_;
    Estimate k_;
};

/// H_s(x_{r_i}, set) for 0-based boundary index i.
CurvatureValue fractional_curvature(const KernelParams& p, const RadialSet& set, std::size_t i,
                                    const QuadratureConfig& q = {});

/// Two-term model of H_s at the inner sphere of B_1 \ B_r for r close to 1:
/// k / r^s + (2c/s) ((1-r)^{-s} - r^{-s}). Requires n >= 2 and r in (0, 1).
double annulus_inner_curvature_asymptotic(const KernelParams& p, double r,
                                          const QuadratureConfig& q = {});

}  // namespace fracshrink
