#include "fracshrink/shrinker.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>

#include "fracshrink/errors.hpp"
#include "fracshrink/stability.hpp"

namespace fracshrink {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double sum_squares(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x * x;
    return m;
}

bool admissible(const std::vector<double>& r) {
    if (r.empty()) return false;
    for (double x : r)
        if (!(x > 0.0) || !std::isfinite(x)) return false;
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        if (!((r[i + 1] - r[i]) / r[i + 1] >= kDegeneracyGuard)) return false;
    return true;
}

}  // namespace

std::string to_string(Family f) {
    return f == Family::AnnuliOnly ? "annuli-only" : "ball-plus-annuli";
}

Family family_from_string(const std::string& name) {
    if (name == "annuli-only") return Family::AnnuliOnly;
    if (name == "ball-plus-annuli") return Family::BallPlusAnnuli;
    throw DomainError("unknown family '" + name + "' (expected annuli-only or ball-plus-annuli)");
}

std::vector<double> ShrinkerSolution::ratios() const {
    std::vector<double> out = set.radii();
    const double top = set.outer_radius();
    for (double& x : out) x /= top;
    return out;
}

std::vector<double> residual_system(const CurvatureEvaluator& eval, const RadialSet& set) {
    std::vector<double> g = eval.all(set);
    for (std::size_t i = 0; i < set.size(); ++i)
        g[i] = -set.orientation(i) * g[i] + set.radius(i);
    return g;
}

std::vector<double> residual_system(const KernelParams& p, const RadialSet& set,
                                    const QuadratureConfig& q) {
    return residual_system(CurvatureEvaluator(p, q), set);
}

double annulus_defect(const CurvatureEvaluator& eval, double r) {
    if (!(r > 0.0 && r < 1.0)) throw DomainError("annulus inner radius must lie in (0, 1)");
    const RadialSet annulus({r, 1.0}, false);
    return eval.at(annulus, 0).value + r * eval.at(annulus, 1).value;
}

double annulus_defect(const KernelParams& p, double r, const QuadratureConfig& q) {
    return annulus_defect(CurvatureEvaluator(p, q), r);
}

ShrinkerSolution find_annulus_shrinker(const KernelParams& p, const QuadratureConfig& q,
                                       double tol) {
    const CurvatureEvaluator eval(p, q);
    double lo = 1e-3;
    double hi = 1.0 - 1e-3;
    double f_lo = annulus_defect(eval, lo);
    double f_hi = annulus_defect(eval, hi);
    while (f_lo >= 0.0 && lo > 1e-9) {
        lo *= 0.1;
        f_lo = annulus_defect(eval, lo);
    }
    while (f_hi <= 0.0 && 1.0 - hi > 1e-5) {
        hi = 1.0 - 0.1 * (1.0 - hi);
        f_hi = annulus_defect(eval, hi);
    }
    if (!(f_lo < 0.0 && f_hi > 0.0))
        throw NumericalError("annulus defect does not change sign on [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]; quadrature fault suspected");

    int steps = 0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (annulus_defect(eval, mid) < 0.0 ? lo : hi) = mid;
        ++steps;
    }
    const double r = 0.5 * (lo + hi);

    // Scale so the outer sphere satisfies lambda = lambda^{-s} H_s(x_1, A).
    const RadialSet unit({r, 1.0}, false);
    const double h_outer = eval.at(unit, 1).value;
    const double lambda = std::pow(h_outer, 1.0 / (1.0 + p.s()));

    ShrinkerSolution sol(p, unit.scaled(lambda));
    sol.family = Family::AnnuliOnly;
    sol.N = 1;
    sol.residual_norm = max_abs(residual_system(eval, sol.set));
    sol.solver_path.push_back(fmt("bisection: %.0f steps, ratio %.15g, bracket width %.1e",
                                  steps, r, hi - lo));
    sol.solver_path.push_back(fmt("rescale: lambda = %.15g", lambda));
    return sol;
}

ShrinkerSolution polish_shrinker(const CurvatureEvaluator& eval, const RadialSet& guess,
                                 const ShrinkerOptions& opts) {
    const KernelParams& p = eval.params();
    const bool origin = guess.contains_origin();
    std::vector<double> x = guess.radii();
    std::vector<double> g = residual_system(eval, guess);
    double merit = sum_squares(g);
    int iterations = 0;
    int backtracks = 0;

    for (; max_abs(g) > opts.tol; ++iterations) {
        if (iterations >= opts.max_newton_iterations)
            throw ConvergenceFailure("Newton iteration budget exhausted", x, max_abs(g));
        const RadialSet current(x, origin);
        const Eigen::MatrixXd jac = residual_jacobian(eval, current);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = -g[i];
        const Eigen::VectorXd dx = jac.colPivHouseholderQr().solve(rhs);

        // Armijo backtracking on |g|^2.
        bool accepted = false;
        for (double alpha = 1.0; alpha >= opts.damping_floor; alpha *= 0.5) {
            std::vector<double> trial = x;
            for (std::size_t i = 0; i < x.size(); ++i)
                trial[i] += alpha * dx(static_cast<Eigen::Index>(i));
            if (!admissible(trial)) {
                ++backtracks;
                continue;
            }
            std::vector<double> g_trial = residual_system(eval, RadialSet(trial, origin));
            const double m_trial = sum_squares(g_trial);
            if (m_trial <= (1.0 - 1e-4 * alpha) * merit) {
                x = std::move(trial);
                g = std::move(g_trial);
                merit = m_trial;
                accepted = true;
                break;
            }
            ++backtracks;
        }
        if (!accepted)
            throw ConvergenceFailure("Newton damping reached its floor", x, max_abs(g));
    }

    ShrinkerSolution sol(p, RadialSet(x, origin));
    sol.family = origin ? Family::BallPlusAnnuli : Family::AnnuliOnly;
    sol.N = static_cast<int>(x.size() / 2);
    sol.residual_norm = max_abs(g);
    sol.solver_path.push_back(fmt("newton: %.0f iterations, %.0f backtracks, residual %.3e",
                                  iterations, backtracks, sol.residual_norm));
    return sol;
}

namespace {

// New innermost pair as fractions of the current innermost radius. The first
// entry is the continuation guess; the others probe for further roots and
// serve as fallbacks when Newton fails from the first.
constexpr double kInsertions[][2] = {{0.15, 0.45}, {0.05, 0.25}, {0.3, 0.7}};

bool same_radii(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-6 * b[i]) return false;
    return true;
}

}  // namespace

ShrinkerSolution find_shrinker(const KernelParams& p, int N, Family family,
                               const QuadratureConfig& q, const ShrinkerOptions& opts) {
    if (N < 1) throw DomainError("N must be >= 1");
    const CurvatureEvaluator eval(p, q);

    std::vector<std::string> path;
    ShrinkerSolution current(p, RadialSet({1.0}, true));
    int level = 0;
    if (family == Family::AnnuliOnly) {
        current = find_annulus_shrinker(p, q);
        if (current.residual_norm > opts.tol) current = polish_shrinker(eval, current.set, opts);
        level = 1;
    } else {
        const double r_ball = std::pow(eval.ball_constant(), 1.0 / (1.0 + p.s()));
        current = ShrinkerSolution(p, RadialSet({r_ball}, true));
        current.residual_norm = max_abs(residual_system(eval, current.set));
        current.solver_path.push_back(fmt("ball: r = k^{1/(1+s)} = %.15g", r_ball));
    }
    path = current.solver_path;

    std::vector<std::vector<double>> extras;
    while (level < N) {
        ++level;
        const std::vector<double> base = current.set.radii();
        const bool origin = current.set.contains_origin();
        std::optional<ShrinkerSolution> chosen;
        for (const auto& ins : kInsertions) {
            std::vector<double> guess = base;
            guess.insert(guess.begin(), {ins[0] * base.front(), ins[1] * base.front()});
            try {
                ShrinkerSolution sol = polish_shrinker(eval, RadialSet(guess, origin), opts);
                if (!chosen) {
                    path.push_back(fmt("continuation: level %.0f, inserted pair at (%.6g, %.6g)",
                                       level, guess[0], guess[1]));
                    path.insert(path.end(), sol.solver_path.begin(), sol.solver_path.end());
                    chosen = std::move(sol);
                } else if (!same_radii(sol.set.radii(), chosen->set.radii()) && level == N &&
                           std::none_of(extras.begin(), extras.end(), [&](const auto& e) {
                               return same_radii(e, sol.set.radii());
                           })) {
                    extras.push_back(sol.set.radii());
                    path.push_back(fmt("extra root: inserted pair at (%.6g, %.6g) converged elsewhere",
                                       guess[0], guess[1]));
                }
            } catch (const ConvergenceFailure& e) {
                path.push_back(fmt("continuation: level %.0f, guess (%.6g, %.6g) failed", level,
                                   guess[0], guess[1]));
                if (&ins == &kInsertions[std::size(kInsertions) - 1] && !chosen) throw;
            }
        }
        current = std::move(*chosen);
    }

    // Independent check with fresh, tighter quadrature.
    const double fresh = max_abs(residual_system(p, current.set, q.scaled(0.1)));
    path.push_back(fmt("verify: residual %.3e at rel_tol %.1e", fresh, 0.1 * q.rel_tol));
    if (fresh > opts.tol)
        throw ConvergenceFailure("solution does not survive re-evaluation at tighter tolerance",
                                 current.set.radii(), fresh);

    current.residual_norm = std::max(current.residual_norm, fresh);
    current.family = family;
    current.N = N;
    current.solver_path = std::move(path);
    current.extra_roots = std::move(extras);
    return current;
}

double cylinder_fiber_factor(int ambient_n, int k, double s) {
    const int m = ambient_n - k;
    if (m < 1 || k < 1) throw DomainError("cylinder needs 1 <= k < n");
    return m * unit_ball_volume(m) * 0.5 * std::beta(0.5 * m, 0.5 * (k + s));
}

ShrinkerSolution cylinder_shrinker(int ambient_n, int k, double s, int N, Family family,
                                   const QuadratureConfig& q, const ShrinkerOptions& opts) {
    if (!(k >= 1 && k < ambient_n))
        throw DomainError("cross-section dimension k must satisfy 1 <= k < n");
    ShrinkerSolution sol = find_shrinker(KernelParams(k, s), N, family, q, opts);
    sol.ambient_dimension = ambient_n;
    // Ambient curvature = fiber factor * cross-section curvature, absorbed by
    // the homothety: r -> F^{1/(1+s)} r.
    sol.ambient_scale = std::pow(cylinder_fiber_factor(ambient_n, k, s), 1.0 / (1.0 + s));
    sol.solver_path.push_back(fmt("cylinder: ambient n = %.0f, cross-section k = %.0f", ambient_n,
                                  k));
    return sol;
}

LimitTable limit_study(int n, const std::vector<double>& s_grid, const QuadratureConfig& q,
                       unsigned threads) {
    if (!std::is_sorted(s_grid.begin(), s_grid.end()))
        throw DomainError("s grid must be sorted");
    LimitTable table;
    table.n = n;
    const double r = table.probe_radius;
    const double classical = n == 1 ? 0.0 : (n - 1) * unit_ball_volume(n - 1);
    table.classical_ball_limit = classical;
    table.classical_defect_limit = classical * (r - 1.0 / r);

    auto fill = [&](double s) {
        LimitRow row;
        row.s = s;
        try {
            const KernelParams p(n, s);
            const CurvatureEvaluator eval(p, q);
            row.scaled_ball_constant = (1.0 - s) * eval.ball_constant();
            row.scaled_defect = (1.0 - s) * annulus_defect(eval, r);
            const ShrinkerSolution sol = find_annulus_shrinker(p, q);
            row.annulus_ratio = sol.ratios().front();
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        return row;
    };

    table.rows.resize(s_grid.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(s_grid.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < s_grid.size(); i = next++) table.rows[i] = fill(s_grid[i]);
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker);
        worker();
    }
    return table;
}

}  // namespace fracshrink
