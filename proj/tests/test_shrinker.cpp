#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fracshrink/errors.hpp"
#include "fracshrink/shrinker.hpp"
#include "oracles.hpp"

using namespace fracshrink;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool strictly_increasing(const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

}  // namespace

TEST_CASE("family names round-trip") {
    CHECK(family_from_string(to_string(Family::AnnuliOnly)) == Family::AnnuliOnly);
    CHECK(family_from_string(to_string(Family::BallPlusAnnuli)) == Family::BallPlusAnnuli);
    CHECK_THROWS_AS(family_from_string("torus"), DomainError);
}

TEST_CASE("annulus defect: negative near 0, positive near 1, one sign change") {
    for (int n : {1, 2, 3}) {
        for (double s : {0.25, 0.5, 0.75}) {
            const KernelParams p(n, s);
            const CurvatureEvaluator eval(p);
            INFO("n=" << n << " s=" << s);
            CHECK(annulus_defect(eval, 1e-3) < 0.0);
            CHECK(annulus_defect(eval, 0.999) > 0.0);
            CHECK(annulus_defect(eval, 0.3) < annulus_defect(eval, 0.6));
            int changes = 0;
            double prev = annulus_defect(eval, 0.5 / 201);
            for (int k = 2; k <= 200; ++k) {
                const double f = annulus_defect(eval, (k - 0.5) / 200.5);
                if ((f > 0) != (prev > 0)) ++changes;
                prev = f;
            }
            CHECK(changes == 1);
        }
    }
    CHECK_THROWS_AS(annulus_defect(KernelParams(2, 0.5), 1.0), DomainError);
}

TEST_CASE("annulus shrinker is stationary and its inner ratio grows with s") {
    double prev_ratio = 0.0;
    for (double s : {0.25, 0.5, 0.75, 0.9}) {
        const KernelParams p(2, s);
        const ShrinkerSolution sol = find_annulus_shrinker(p);
        INFO("s=" << s);
        CHECK(sol.set.size() == 2);
        CHECK_FALSE(sol.set.contains_origin());
        CHECK(sol.residual_norm < 1e-8);
        CHECK(max_abs(residual_system(p, sol.set)) < 1e-8);
        CHECK(std::abs(annulus_defect(p, sol.ratios()[0])) < 1e-8);
        CHECK(sol.ratios()[0] > prev_ratio);
        prev_ratio = sol.ratios()[0];
        CHECK_FALSE(sol.solver_path.empty());
    }
}

TEST_CASE("ball of radius k^{1/(1+s)} is stationary") {
    for (int n : {1, 2, 3}) {
        for (double s : {0.25, 0.5, 0.75}) {
            const KernelParams p(n, s);
            const double r = std::pow(oracle::ball_constant(n, s), 1.0 / (1.0 + s));
            INFO("n=" << n << " s=" << s);
            CHECK(max_abs(residual_system(p, RadialSet({r}, true))) < 1e-9 * r);
        }
    }
}

TEST_CASE("residual scaling: g(lambda r) = (lambda - lambda^{-s}) r at a stationary set") {
    const KernelParams p(2, 0.5);
    const ShrinkerSolution sol = find_annulus_shrinker(p);
    for (double lambda : {0.5, 0.9, 1.1, 3.0}) {
        const std::vector<double> g = residual_system(p, sol.set.scaled(lambda));
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double expected = (lambda - std::pow(lambda, -0.5)) * sol.set.radius(i);
            CHECK(std::abs(g[i] - expected) < 1e-7);
        }
    }
}

TEST_CASE("find_shrinker N = 1 annuli-only reproduces the bisection annulus") {
    const KernelParams p(2, 0.5);
    const ShrinkerSolution a = find_annulus_shrinker(p);
    const ShrinkerSolution b = find_shrinker(p, 1, Family::AnnuliOnly);
    REQUIRE(b.set.size() == 2);
    CHECK(rel(a.set.radius(0), b.set.radius(0)) < 1e-7);
    CHECK(rel(a.set.radius(1), b.set.radius(1)) < 1e-7);
    CHECK(b.family == Family::AnnuliOnly);
    CHECK(b.N == 1);
}

TEST_CASE("multi-sphere families at (2, 0.5)") {
    const KernelParams p(2, 0.5);
    struct Case {
        int N;
        Family family;
        std::size_t count;
    };
    std::vector<std::vector<double>> ratios;
    for (Case c : {Case{2, Family::AnnuliOnly, 4}, Case{1, Family::BallPlusAnnuli, 3},
                   Case{2, Family::BallPlusAnnuli, 5}}) {
        const ShrinkerSolution sol = find_shrinker(p, c.N, c.family);
        INFO("N=" << c.N << " family=" << to_string(c.family));
        CHECK(sol.set.size() == c.count);
        CHECK(sol.set.contains_origin() == (c.family == Family::BallPlusAnnuli));
        CHECK(sol.family == c.family);
        CHECK(sol.N == c.N);
        CHECK(sol.residual_norm <= 1e-8);
        CHECK(max_abs(residual_system(p, sol.set, QuadratureConfig{}.scaled(0.1))) <= 1e-8);
        CHECK(strictly_increasing(sol.set.radii()));
        for (std::size_t i = 0; i + 1 < sol.set.size(); ++i)
            CHECK((sol.set.radius(i + 1) - sol.set.radius(i)) / sol.set.radius(i + 1) > 1e-4);
        ratios.push_back(sol.ratios());
    }
    // the families are genuinely different configurations
    CHECK(ratios[0].size() != ratios[1].size());
    CHECK(ratios[1].size() != ratios[2].size());
    CHECK_THROWS_AS(find_shrinker(p, 0, Family::AnnuliOnly), DomainError);
}

TEST_CASE("ball-plus-annuli across dimensions and orders") {
    for (int n : {1, 2, 3}) {
        for (double s : {0.25, 0.75}) {
            const KernelParams p(n, s);
            const ShrinkerSolution sol = find_shrinker(p, 1, Family::BallPlusAnnuli);
            INFO("n=" << n << " s=" << s);
            CHECK(sol.residual_norm <= 1e-8);
            CHECK(strictly_increasing(sol.set.radii()));
        }
    }
}

TEST_CASE("fiber factor matches direct quadrature") {
    boost::math::quadrature::tanh_sinh<double> ts;
    for (auto [n, k] : {std::pair{2, 1}, {3, 1}, {3, 2}, {4, 2}, {5, 3}}) {
        for (double s : {0.25, 0.5, 0.75}) {
            const int m = n - k;
            // rho = tan(theta): \int_0^inf rho^{m-1} (1+rho^2)^{-(n+s)/2} drho
            auto f = [&](double t) {
                return std::pow(std::sin(t), m - 1) * std::pow(std::cos(t), k + s - 1);
            };
            const double radial = ts.integrate(f, 0.0, oracle::pi / 2);
            const double expected = m * oracle::omega(m) * radial;
            INFO("n=" << n << " k=" << k << " s=" << s);
            CHECK(rel(cylinder_fiber_factor(n, k, s), expected) < 1e-10);
        }
    }
    CHECK_THROWS_AS(cylinder_fiber_factor(2, 2, 0.5), DomainError);
}

TEST_CASE("cylinders share the cross-section ratios") {
    const double s = 0.5;
    const ShrinkerSolution flat = find_annulus_shrinker(KernelParams(2, s));
    const ShrinkerSolution c32 = cylinder_shrinker(3, 2, s, 1, Family::AnnuliOnly);
    const ShrinkerSolution c42 = cylinder_shrinker(4, 2, s, 1, Family::AnnuliOnly);
    const ShrinkerSolution c21 = cylinder_shrinker(2, 1, s, 1, Family::AnnuliOnly);
    const ShrinkerSolution line = find_annulus_shrinker(KernelParams(1, s));
    CHECK(c32.ambient_dimension == 3);
    CHECK(rel(c32.ratios()[0], flat.ratios()[0]) < 1e-7);
    CHECK(rel(c42.ratios()[0], c32.ratios()[0]) < 1e-12);
    CHECK(rel(c21.ratios()[0], line.ratios()[0]) < 1e-7);
    CHECK(rel(c32.ambient_scale, std::pow(cylinder_fiber_factor(3, 2, s), 1 / 1.5)) < 1e-14);
    CHECK(c42.ambient_scale != c32.ambient_scale);
    CHECK_THROWS_AS(cylinder_shrinker(2, 2, s, 1, Family::AnnuliOnly), DomainError);
}

TEST_CASE("limit study rows are ordered and thread-count independent") {
    const std::vector<double> grid{0.3, 0.5, 0.7, 0.9};
    const LimitTable one = limit_study(2, grid, {}, 1);
    const LimitTable four = limit_study(2, grid, {}, 4);
    REQUIRE(one.rows.size() == grid.size());
    CHECK(one.classical_ball_limit == doctest::Approx(2.0));
    CHECK(one.classical_defect_limit == doctest::Approx(-3.0));
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const LimitRow& a = one.rows[i];
        const LimitRow& b = four.rows[i];
        CHECK(a.s == grid[i]);
        CHECK(a.error.empty());
        REQUIRE(a.annulus_ratio.has_value());
        CHECK(*a.annulus_ratio > prev);
        prev = *a.annulus_ratio;
        CHECK(a.annulus_ratio == b.annulus_ratio);
        CHECK(a.scaled_ball_constant == b.scaled_ball_constant);
        CHECK(a.scaled_defect == b.scaled_defect);
        CHECK(rel(*a.scaled_ball_constant, (1 - grid[i]) * oracle::ball_constant(2, grid[i])) <
              1e-9);
    }
    CHECK_THROWS_AS(limit_study(2, {0.5, 0.3}), DomainError);
}
