#pragma once

// Closed forms used as independent references. Nothing here calls the library.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

inline double omega(int k) { return std::pow(pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0); }

// ---- n = 1: the "sphere" of radius t is the two points +-t -------------------

inline double k1_kernel(double r, double t, double s) {
    return std::pow(std::abs(r - t), -1.0 - s) + std::pow(r + t, -1.0 - s);
}

inline double k1_ball(double r, double rho, double s) {
    return (std::pow(r - rho, -s) - std::pow(r + rho, -s)) / s;
}

inline double k1_complement(double r, double rho, double s) {
    return (std::pow(rho - r, -s) + std::pow(rho + r, -s)) / s;
}

// (y + delta)^{-s} - y^{-s}, accurate for small delta.
inline double pow_step(double y, double delta, double s) {
    return std::pow(y, -s) * std::expm1(-s * std::log1p(delta / y));
}

// \int_a^b [(2r - d)^{-1-s} - (2r + d)^{-1-s}] dd; the |d|^{-1-s} parts cancel.
inline double k1_paired(double r, double a, double b, double s) {
    return (pow_step(2 * r - a, a - b, s) + pow_step(2 * r + a, b - a, s)) / s;
}

inline double k1_ball_constant(double s) { return std::pow(2.0, 1.0 - s) / s; }

// Principal-value curvature at x = radii[i] of the 1-D set whose boundary
// points are +-radii, assembled interval by interval from |x - y|^{-1-s}
// antiderivatives.
inline double k1_curvature(const std::vector<double>& radii, bool contains_origin,
                           std::size_t i, double s) {
    std::vector<double> pts;
    for (auto it = radii.rbegin(); it != radii.rend(); ++it) pts.push_back(-*it);
    for (double r : radii) pts.push_back(r);
    const std::size_t m = radii.size();
    // sign on (pts[j], pts[j+1]): +1 outside the set, -1 inside
    auto sign_between = [&](double mid) {
        const double a = std::abs(mid);
        std::size_t crossed = 0;
        for (double r : radii)
            if (a > r) ++crossed;
        const bool inside = contains_origin ? crossed % 2 == 0 : crossed % 2 == 1;
        return inside ? -1.0 : 1.0;
    };
    const double x = radii[i];
    // \int_p^q |x - y|^{-1-s} dy for an interval not containing x
    auto mass = [&](double p, double q) {
        if (q <= x) return (std::pow(x - q, -s) - std::pow(x - p, -s)) / s;
        return (std::pow(p - x, -s) - std::pow(q - x, -s)) / s;
    };
    double h = 0.0;
    // unbounded pieces are outside the set
    h += std::pow(x - pts.front(), -s) / s;  // (-inf, pts[0])
    if (i + 1 < m) h += std::pow(pts.back() - x, -s) / s;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        const double p = pts[j];
        const double q = pts[j + 1];
        if (p == x || q == x) continue;
        h += sign_between(0.5 * (p + q)) * mass(p, q);
    }
    // the two pieces touching x, combined symmetrically
    const std::size_t at = m + i;  // index of x in pts
    const double left = pts[at - 1];
    const double sl = sign_between(0.5 * (left + x));
    if (at + 1 < pts.size()) {
        const double right_gap = pts[at + 1] - x;
        const double sr = sign_between(x + 0.5 * right_gap);
        h += (-sl * std::pow(x - left, -s) - sr * std::pow(right_gap, -s)) / s;
    } else {
        // outermost point: the right piece is the exterior (x, inf), whose
        // eps^{-s}/s cancels the left one
        h += -sl * std::pow(x - left, -s) / s;
    }
    return h;
}

// ---- n = 3: K(r, t) = 2 pi t (|r-t|^{-1-s} - (r+t)^{-1-s}) / (r (1+s)) -------

inline double k3_kernel(double r, double t, double s) {
    return 2 * pi * t * (std::pow(std::abs(r - t), -1.0 - s) - std::pow(r + t, -1.0 - s)) /
           (r * (1.0 + s));
}

namespace detail {
// Antiderivatives in t of t (r - t)^{-1-s}, t (t + r)^{-1-s}, t (t - r)^{-1-s}.
inline double f1(double r, double t, double s) {
    const double u = r - t;
    return r * std::pow(u, -s) / s + std::pow(u, 1.0 - s) / (1.0 - s);
}
inline double f2(double r, double t, double s) {
    const double v = t + r;
    return std::pow(v, 1.0 - s) / (1.0 - s) + r * std::pow(v, -s) / s;
}
inline double f3(double r, double t, double s) {
    const double w = t - r;
    return std::pow(w, 1.0 - s) / (1.0 - s) - r * std::pow(w, -s) / s;
}
}  // namespace detail

inline double k3_ball(double r, double rho, double s) {
    using namespace detail;
    const double c = 2 * pi / (r * (1.0 + s));
    return c * ((f1(r, rho, s) - f1(r, 0.0, s)) - (f2(r, rho, s) - f2(r, 0.0, s)));
}

inline double k3_complement(double r, double rho, double s) {
    using namespace detail;
    const double c = 2 * pi / (r * (1.0 + s));
    return c * (f2(r, rho, s) - f3(r, rho, s));  // f3 - f2 -> 0 at infinity
}

inline double k3_paired(double r, double a, double b, double s) {
    using namespace detail;
    const double c = 2 * pi / (r * (1.0 + s));
    // f1(r - a) + f3(r + a) = 2 a^{1-s} / (1 - s): the a^{-s} parts cancel
    const double near = 2 * std::pow(a, 1.0 - s) / (1.0 - s);
    const double inner = near - f2(r, r - a, s) - (f1(r, r - b, s) - f2(r, r - b, s));
    const double outer = -f2(r, r + a, s) - (f3(r, r + b, s) - f2(r, r + b, s));
    return c * (inner + outer);
}

// ---- constants --------------------------------------------------------------

// Unit-ball curvature from the chord decomposition of B_1 about a boundary point.
inline double ball_constant(int n, double s) {
    if (n == 1) return k1_ball_constant(s);
    return std::pow(2.0, 1.0 - s) / s * (n - 1) * omega(n - 1) * 0.5 *
           std::beta(0.5 * (n - 1), 0.5 * (1.0 - s));
}

inline double beta_constant(int n, double s) {
    return (n - 1) * omega(n - 1) * 0.5 * std::beta(0.5 * (n - 1), 0.5 * (s + 1.0));
}

// High-precision reference values (50-digit quadrature of the defining integrals).
inline constexpr double k2_025 = 25.938671533041991;
inline constexpr double k2_050 = 14.8325974184109753;
inline constexpr double k2_075 = 14.760027356342148;
inline constexpr double k3_050 = 35.5430635052669300;
inline constexpr double c2_050 = 2.39628046947118;

// ---- generators ---------------------------------------------------------------

struct RandomSet {
    int n;
    double s;
    std::vector<double> radii;
    bool contains_origin;
};

// 1..max_count radii with relative gaps of at least 2.5%; the parity fixes contains_origin.
inline RandomSet random_set(std::mt19937& rng, int max_count = 5) {
    std::uniform_int_distribution<int> dim(1, 3);
    std::uniform_real_distribution<double> order(0.1, 0.9);
    std::uniform_int_distribution<int> count(1, max_count);
    std::uniform_real_distribution<double> step(0.05, 1.0);
    std::uniform_real_distribution<double> first(0.1, 2.0);
    RandomSet out{dim(rng), order(rng), {}, false};
    const int m = count(rng);
    double r = first(rng);
    for (int i = 0; i < m; ++i) {
        out.radii.push_back(r);
        r *= 1.0 / (1.0 - step(rng) * 0.5);
    }
    out.contains_origin = m % 2 == 1;
    return out;
}

}  // namespace oracle
