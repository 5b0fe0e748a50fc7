#pragma once

// Homothetically shrinking radial sets: stationary points of the rescaled flow
//   r_i' = g_i(r) = -e_i H_s(x_{r_i}, E) + r_i,
// with e_i = +1 at outer and -1 at inner boundaries.

#include <optional>
#include <string>
#include <vector>

#include "fracshrink/curvature.hpp"
#include "fracshrink/kernel_geometry.hpp"

namespace fracshrink {

enum class Family { AnnuliOnly, BallPlusAnnuli };

std::string to_string(Family f);
Family family_from_string(const std::string& name);

struct ShrinkerSolution {
    ShrinkerSolution(KernelParams p, RadialSet radial_set)
        : params(p), set(std::move(radial_set)) {}

    KernelParams params;
    RadialSet set;
    double residual_norm = 0.0;  // max-norm of g at `set`
    Family family = Family::AnnuliOnly;
    int N = 1;
    /// One entry per solver stage, e.g. "bisection: 44 steps, width 1e-13".
    std::vector<std::string> solver_path;
    /// Other stationary points met along the way; reported, never selected.
    std::vector<std::vector<double>> extra_roots;
    /// Cylindrical shrinkers: ambient dimension and the factor by which the
    /// cross-section radii scale to solve the ambient rescaled flow.
    int ambient_dimension = 0;
    double ambient_scale = 1.0;

    /// r_i / r_max for every radius.
    std::vector<double> ratios() const;
};

/// g(r) for the rescaled flow; zero exactly at self-shrinkers with unit homothety constant.
std::vector<double> residual_system(const KernelParams& p, const RadialSet& set,
                                    const QuadratureConfig& q = {});
std::vector<double> residual_system(const CurvatureEvaluator& eval, const RadialSet& set);

/// f_s(r) = H_s(x_r, A) + r H_s(x_1, A) for the annulus A = B_1 \ B_r.
double annulus_defect(const KernelParams& p, double r, const QuadratureConfig& q = {});
double annulus_defect(const CurvatureEvaluator& eval, double r);

/// Unique self-shrinking annulus, by bisection on the annulus defect, rescaled so g = 0.
ShrinkerSolution find_annulus_shrinker(const KernelParams& p, const QuadratureConfig& q = {},
                                       double tol = 1e-13);

struct ShrinkerOptions {
    double tol = 1e-8;  // target for max |g_i|
    int max_newton_iterations = 60;
    double damping_floor = 0x1p-20;
};

/// Stationary radii with 2N (annuli-only) or 2N + 1 (ball-plus-annuli) boundary spheres.
ShrinkerSolution find_shrinker(const KernelParams& p, int N, Family family,
                               const QuadratureConfig& q = {}, const ShrinkerOptions& opts = {});

/// Damped Newton on g from an arbitrary starting set; throws ConvergenceFailure.
ShrinkerSolution polish_shrinker(const CurvatureEvaluator& eval, const RadialSet& guess,
                                 const ShrinkerOptions& opts = {});

/// Measure of the (n-k)-dimensional fiber integral
/// \int_{R^{n-k}} (1 + |z|^2)^{-(n+s)/2} dz that links the ambient curvature of
/// R^{n-k} x C to the k-dimensional curvature of the cross-section C.
double cylinder_fiber_factor(int ambient_n, int k, double s);

/// Cylindrical shrinker R^{n-k} x (radial set in R^k): cross-section radii solve
/// the k-dimensional problem; the ambient normalization is recorded in ambient_scale.
ShrinkerSolution cylinder_shrinker(int ambient_n, int k, double s, int N, Family family,
                                   const QuadratureConfig& q = {},
                                   const ShrinkerOptions& opts = {});

struct LimitRow {
    double s = 0.0;
    std::optional<double> annulus_ratio;  // r(n, s) at outer radius 1
    std::optional<double> scaled_ball_constant;  // (1 - s) k(n, s)
    std::optional<double> scaled_defect;         // (1 - s) f_s(0.5)
    std::string error;                           // non-empty if the row failed
};

struct LimitTable {
    int n = 0;
    double probe_radius = 0.5;
    /// Classical limits of the scaled columns: (n-1) w_{n-1} and (n-1) w_{n-1} (r - 1/r).
    double classical_ball_limit = 0.0;
    double classical_defect_limit = 0.0;
    std::vector<LimitRow> rows;
};

/// Rows are independent and computed on up to `threads` workers (0: hardware concurrency).
LimitTable limit_study(int n, const std::vector<double>& s_grid, const QuadratureConfig& q = {},
                       unsigned threads = 1);

}  // namespace fracshrink
