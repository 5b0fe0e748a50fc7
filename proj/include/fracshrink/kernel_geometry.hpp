#pragma once

// Reductions of the kernel |x - y|^{-(n+s)} integrated over spheres, balls,
// ball complements and paired shells to one-dimensional quadratures.
//
// Throughout, x_r denotes any point with |x_r| = r and
//   K(r, t) = \int_{\partial B_t} |x_r - y|^{-(n+s)} dy.

#include <cstddef>
#include <span>
#include <vector>

namespace fracshrink {

/// Dimension n >= 1 and fractional order s in (0, 1).
class KernelParams {
public:
    KernelParams(int n, double s);

    int n() const noexcept { return n_; }
    double s() const noexcept { return s_; }

    /// (n + s) / 2, the exponent applied to squared distances.
    double half_order() const noexcept { return 0.5 * (n_ + s_); }

    friend bool operator==(const KernelParams&, const KernelParams&) = default;

private:
    int n_;
    double s_;
};

struct QuadratureConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_subdivisions = 60;
    /// Fraction of the unit ball's shell integral handled by paired quadrature.
    double pairing_cutoff = 0.5;

    void validate() const;

    /// Same budgets with both tolerances multiplied by `factor`.
    QuadratureConfig scaled(double factor) const;
};

/// Minimum relative gap (r_{i+1} - r_i) / r_{i+1} accepted by curvature evaluation.
inline constexpr double kDegeneracyGuard = 1e-6;

/// Rotationally symmetric set given by sorted boundary radii.
///
/// With contains_origin the set is B_{r_0} u (B_{r_2} \ B_{r_1}) u ...,
/// otherwise (B_{r_1} \ B_{r_0}) u (B_{r_3} \ B_{r_2}) u ... (indices 0-based).
/// The outermost radius is always an outer boundary, so the radius count is
/// odd exactly when the origin belongs to the set.
class RadialSet {
public:
    RadialSet(std::vector<double> radii, bool contains_origin);

    /// Annuli-only or ball-plus-annuli set, origin membership inferred from parity.
    static RadialSet from_radii(std::vector<double> radii);

    std::size_t size() const noexcept { return radii_.size(); }
    double radius(std::size_t i) const { return radii_.at(i); }
    double outer_radius() const noexcept { return radii_.back(); }
    const std::vector<double>& radii() const noexcept { return radii_; }
    bool contains_origin() const noexcept { return contains_origin_; }

    /// +1 if the set lies locally inside sphere i (outer boundary), -1 otherwise.
    int orientation(std::size_t i) const;

    /// +1 for t outside the set, -1 inside. Undefined on boundary radii.
    int sign_at(double t) const;

    RadialSet scaled(double lambda) const;

    /// Throws DegenerateConfiguration if adjacent radii violate `guard`.
    void check_separation(double guard = kDegeneracyGuard) const;

private:
    std::vector<double> radii_;
    bool contains_origin_;
};

/// A quadrature result and its error estimate.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

/// Volume of the unit ball in R^k (k >= 0).
double unit_ball_volume(int k);

/// K(r, t). Requires r != t.
Estimate sphere_kernel_integral(const KernelParams& p, double r, double t,
                                const QuadratureConfig& q = {});

/// \int_0^rho K(r, t) dt, the kernel mass of B_rho seen from radius r > rho.
Estimate ball_kernel_integral(const KernelParams& p, double r, double rho,
                              const QuadratureConfig& q = {});

/// \int_rho^infty K(r, t) dt for rho > r.
Estimate complement_kernel_integral(const KernelParams& p, double r, double rho,
                                    const QuadratureConfig& q = {});

/// \int_a^b [K(r, r - d) - K(r, r + d)] dd with 0 <= a <= b <= r.
/// The leading |d|^{-(1+s)} parts cancel, so a = 0 is allowed.
Estimate paired_shell_integral(const KernelParams& p, double r, double a, double b,
                               const QuadratureConfig& q = {});

}  // namespace fracshrink
