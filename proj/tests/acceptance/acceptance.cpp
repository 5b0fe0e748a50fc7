// One PASS/FAIL line per acceptance criterion, with the measured values.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fracshrink/curvature.hpp"
#include "fracshrink/errors.hpp"
#include "fracshrink/flow.hpp"
#include "fracshrink/shrinker.hpp"
#include "fracshrink/stability.hpp"
#include "../oracles.hpp"

using namespace fracshrink;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    Verdict() { detail.precision(8); }

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_seconds,
               const std::function<void(Verdict&)>& body) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(v);
    } catch (const std::exception& e) {
        v.pass = false;
        v.detail << " [exception: " << e.what() << "]";
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget_seconds > 0) v.require(elapsed < budget_seconds, "runtime budget");
    if (!v.pass) ++failures;
    std::printf("%s %2d %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", id, name.c_str(),
                v.detail.str().c_str(), elapsed);
    std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (!(v[i] < v[i + 1])) return false;
    return true;
}

Eigen::MatrixXd finite_difference_jacobian(const KernelParams& p, const RadialSet& set) {
    QuadratureConfig q;
    q.rel_tol = 1e-12;
    q.abs_tol = 1e-14;
    const CurvatureEvaluator eval(p, q);
    const auto m = static_cast<Eigen::Index>(set.size());
    Eigen::MatrixXd fd(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        std::vector<double> plus = set.radii();
        std::vector<double> minus = set.radii();
        const double h = 1e-5 * plus[uj];
        plus[uj] += h;
        minus[uj] -= h;
        const auto gp = residual_system(eval, RadialSet(plus, set.contains_origin()));
        const auto gm = residual_system(eval, RadialSet(minus, set.contains_origin()));
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            fd(i, j) = (gp[ui] - gm[ui]) / (2 * h);
        }
    }
    return fd;
}

// Largest violation ratio |a - fd| / max(1e-4 |fd|, 1e-6); <= 1 passes.
double fd_violation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& fd) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            worst = std::max(worst, std::abs(a(i, j) - fd(i, j)) /
                                        std::max(1e-4 * std::abs(fd(i, j)), 1e-6));
    return worst;
}

}  // namespace

int main() {
    criterion(1, "one-dimensional closed forms", 1.0, [](Verdict& v) {
        double worst = 0.0;
        for (int k = 1; k <= 9; ++k) {
            const double s = 0.1 * k;
            const KernelParams p(1, s);
            worst = std::max(worst, rel(ball_curvature_constant(p).value, oracle::k1_ball_constant(s)));
            for (auto [r, rho] : {std::pair{2.0, 1.0}, {1.0, 0.999}, {5.0, 0.1}, {1.0, 1e-3}})
                worst = std::max(worst, rel(ball_kernel_integral(p, r, rho).value,
                                            oracle::k1_ball(r, rho, s)));
            for (auto [r, rho] : {std::pair{1.0, 2.0}, {1.0, 1.001}, {0.1, 7.0}})
                worst = std::max(worst, rel(complement_kernel_integral(p, r, rho).value,
                                            oracle::k1_complement(r, rho, s)));
            for (auto [a, b] : {std::pair{0.0, 1.0}, {0.0, 0.5}, {0.2, 0.7}, {0.0, 1e-4}})
                worst = std::max(worst, rel(paired_shell_integral(p, 1.0, a, b).value,
                                            oracle::k1_paired(1.0, a, b, s)));
        }
        v.detail << "max relative error " << worst;
        v.require(worst <= 1e-8, "relative error <= 1e-8");
    });

    criterion(2, "merging-spheres asymptotic", 10.0, [](Verdict& v) {
        double worst = 0.0;
        bool monotone = true;
        for (int n : {2, 3}) {
            for (double s : {0.25, 0.5, 0.75}) {
                const KernelParams p(n, s);
                const double c = merging_constant(p);
                v.require(rel(c, oracle::beta_constant(n, s)) < 1e-12, "Beta constant");
                double prev = INFINITY;
                double last = 0.0;
                for (double d : {1e-1, 1e-2, 1e-3}) {
                    last = std::abs(std::pow(d, 1 + s) *
                                        sphere_kernel_integral(p, 1.0, 1.0 + d).value -
                                    c) /
                           c;
                    monotone = monotone && last < prev;
                    prev = last;
                }
                worst = std::max(worst, last);
            }
        }
        v.detail << "max defect at 1e-3 " << worst << ", monotone " << (monotone ? "yes" : "no");
        v.require(worst < 0.02, "within 2%");
        v.require(monotone, "monotone defect");
    });

    criterion(3, "annulus shrinker", 120.0, [](Verdict& v) {
        double worst_g = 0.0;
        int bad_scans = 0;
        for (int n : {1, 2, 3}) {
            for (double s : {0.25, 0.5, 0.75}) {
                const KernelParams p(n, s);
                const CurvatureEvaluator eval(p);
                int changes = 0;
                double prev = annulus_defect(eval, 0.5 / 200);
                for (int k = 1; k < 200; ++k) {
                    const double f = annulus_defect(eval, (k + 0.5) / 200);
                    if ((f > 0) != (prev > 0)) ++changes;
                    prev = f;
                }
                if (changes != 1) ++bad_scans;
                const ShrinkerSolution sol = find_annulus_shrinker(p);
                worst_g = std::max(worst_g, max_abs(residual_system(p, sol.set)));
            }
        }
        v.detail << (9 - bad_scans) << " of 9 scans with exactly one sign change, max |g| "
                 << worst_g;
        v.require(bad_scans == 0, "unique sign change");
        v.require(worst_g <= 1e-8, "|g| <= 1e-8");
    });

    criterion(4, "multi-annulus existence at (2, 0.5)", 300.0, [](Verdict& v) {
        const KernelParams p(2, 0.5);
        struct Case {
            int N;
            Family family;
        };
        for (Case c : {Case{2, Family::AnnuliOnly}, Case{1, Family::BallPlusAnnuli},
                       Case{2, Family::BallPlusAnnuli}}) {
            const ShrinkerSolution sol = find_shrinker(p, c.N, c.family);
            const double g = max_abs(residual_system(p, sol.set));
            v.detail << to_string(c.family) << " N=" << c.N << ": " << sol.set.size()
                     << " radii, |g| " << g << "; ";
            v.require(g <= 1e-8, "|g| <= 1e-8");
            v.require(strictly_increasing(sol.set.radii()), "increasing radii");
        }
    });

    criterion(5, "Jacobian against finite differences", 0.0, [](Verdict& v) {
        const KernelParams p(2, 0.5);
        const ShrinkerSolution annulus = find_annulus_shrinker(p);
        const ShrinkerSolution two = find_shrinker(p, 2, Family::AnnuliOnly);
        for (const ShrinkerSolution* sol : {&annulus, &two}) {
            const Eigen::MatrixXd fd = finite_difference_jacobian(p, sol->set);
            const double stationary = fd_violation(jacobian(p, *sol), fd);
            const double general = fd_violation(residual_jacobian(CurvatureEvaluator(p), sol->set), fd);
            v.detail << sol->set.size() << " radii: tolerance use " << stationary
                     << " (stationary form), " << general << " (general form); ";
            v.require(stationary <= 1.0 && general <= 1.0, "within max(1e-4 rel, 1e-6 abs)");
        }
    });

    criterion(6, "spectral structure", 0.0, [](Verdict& v) {
        const double s = 0.5;
        const KernelParams p(2, s);
        std::vector<ShrinkerSolution> sols;
        sols.push_back(find_annulus_shrinker(p));
        sols.push_back(find_shrinker(p, 2, Family::AnnuliOnly));
        sols.push_back(find_shrinker(p, 1, Family::BallPlusAnnuli));
        sols.push_back(find_shrinker(p, 2, Family::BallPlusAnnuli));
        for (const ShrinkerSolution& sol : sols) {
            const StabilityReport rep = analyze_stability(p, sol);
            // the eigenvalue closest to s + 1 is the radial one; the largest other one
            // must clear s + 1
            std::size_t radial = 0;
            for (std::size_t k = 0; k < rep.eigenvalues.size(); ++k)
                if (std::abs(rep.eigenvalues[k] - s - 1) < std::abs(rep.eigenvalues[radial] - s - 1))
                    radial = k;
            double other = -INFINITY;
            for (std::size_t k = 0; k < rep.eigenvalues.size(); ++k)
                if (k != radial) other = std::max(other, rep.eigenvalues[k]);
            v.detail << sol.set.size() << " radii: defect " << rep.radial_eigen_defect
                     << ", other eigenvalue " << other << ", morse " << rep.morse_index
                     << ", symmetrization " << rep.symmetrization_defect << "; ";
            v.require(rep.radial_eigen_defect <= 1e-6, "radial eigenpair");
            v.require(other - (s + 1) > 1e-3, "second eigenvalue margin");
            v.require(rep.morse_index >= 2, "morse index >= 2");
            v.require(rep.symmetrization_defect <= 1e-6, "symmetrization");
        }
        const double rstar = std::pow(ball_curvature_constant(p).value, 1 / (1 + s));
        ShrinkerSolution ball(p, RadialSet({rstar}, true));
        ball.residual_norm = max_abs(residual_system(p, ball.set));
        const StabilityReport rep = analyze_stability(p, ball);
        v.detail << "ball: eigenvalue " << rep.eigenvalues[0] << ", morse " << rep.morse_index;
        v.require(rep.morse_index == 1, "ball morse index 1");
    });

    criterion(7, "self-similar extinction", 60.0, [](Verdict& v) {
        const double s = 0.5;
        const KernelParams p(2, s);
        const ShrinkerSolution sol = find_annulus_shrinker(p);
        const FlowState start{0.0, sol.set.radii(), false};
        const double ratio0 = sol.ratios()[0];

        FlowOptions numeric;
        numeric.closed_form_completion = false;
        const double t_tenth = (1 - std::pow(0.1, 1 + s)) / (1 + s);
        const FlowTrace pure = integrate(p, start, FlowKind::Original, t_tenth, {}, numeric);
        double drift = 0.0;
        for (const FlowState& st : pure.states)
            drift = std::max(drift, std::abs(st.radii[0] / st.radii[1] - ratio0));

        const FlowTrace full = integrate(p, start, FlowKind::Original, 10.0);
        double full_drift = 0.0;
        for (const FlowState& st : full.states)
            if (st.radii[1] > 0) full_drift = std::max(full_drift, std::abs(st.radii[0] / st.radii[1] - ratio0));
        const double T = full.extinction_time.value_or(NAN);
        v.detail << "drift to scale 0.1 (numerical only) " << drift << ", drift with completion "
                 << full_drift << ", extinction " << T << " vs " << 1 / (1 + s) << " ("
                 << full.termination_tag() << ")";
        v.require(drift < 1e-3 && full_drift < 1e-3, "ratio drift < 1e-3");
        v.require(full.termination == Termination::Extinction, "extinction");
        v.require(rel(T, 1 / (1 + s)) < 0.01, "extinction time within 1%");
    });

    criterion(8, "instability of the annulus", 0.0, [](Verdict& v) {
        const KernelParams p(2, 0.5);
        const ShrinkerSolution sol = find_annulus_shrinker(p);
        const StabilityReport rep = analyze_stability(p, sol);
        std::vector<double> start = sol.set.radii();
        for (std::size_t i = 0; i < start.size(); ++i)
            start[i] += 1e-4 * rep.unstable_direction(static_cast<Eigen::Index>(i));
        const FlowTrace trace = integrate(p, FlowState{0.0, start, false}, FlowKind::Rescaled, 30.0);
        const GrowthFit fit = measure_growth_rate(trace, sol.set.radii());
        v.detail << "rate " << fit.rate << " vs eigenvalue " << rep.eigenvalues[0] << " ("
                 << fit.points << " points, t in [" << fit.t_begin << ", " << fit.t_end
                 << "]), max deviation " << fit.max_deviation << ", " << trace.termination_tag();
        v.require(fit.max_deviation > 1e-2, "leaves the window");
        v.require(rel(fit.rate, rep.eigenvalues[0]) < 0.05, "rate within 5%");
    });

    criterion(9, "limit study", 0.0, [](Verdict& v) {
        const LimitTable table = limit_study(2, {0.3, 0.5, 0.7, 0.9, 0.99}, {}, 0);
        std::vector<double> ratios;
        for (std::size_t i = 0; i < 4; ++i) ratios.push_back(table.rows[i].annulus_ratio.value_or(NAN));
        const LimitRow& last = table.rows.back();
        const double kk = last.scaled_ball_constant.value_or(NAN);
        const double ff = last.scaled_defect.value_or(NAN);
        v.detail << "ratios";
        for (double r : ratios) v.detail << " " << r;
        v.detail << "; at s=0.99 (1-s)k = " << kk << " (target 1), (1-s)f(0.5) = " << ff
                 << " (target -1.5); per unit classical limit " << table.classical_ball_limit
                 << ": " << kk / table.classical_ball_limit << ", "
                 << ff / table.classical_ball_limit;
        v.require(strictly_increasing(ratios), "increasing ratio");
        v.require(rel(kk, 1.0) < 0.02, "(1-s)k within 2% of 1");
        v.require(rel(ff, -1.5) < 0.05, "(1-s)f within 5% of -1.5");
    });

    criterion(10, "scale invariance", 0.0, [](Verdict& v) {
        std::mt19937 rng(2024);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const oracle::RandomSet rs = oracle::random_set(rng);
            const KernelParams p(rs.n, rs.s);
            const CurvatureEvaluator eval(p);
            const RadialSet set(rs.radii, rs.contains_origin);
            const std::vector<double> h = eval.all(set);
            for (double lambda : {0.5, 2.0, 10.0}) {
                const std::vector<double> hl = eval.all(set.scaled(lambda));
                for (std::size_t i = 0; i < h.size(); ++i)
                    worst = std::max(worst, rel(hl[i], std::pow(lambda, -rs.s) * h[i]));
            }
        }
        v.detail << "100 sets, max relative deviation " << worst;
        v.require(worst <= 1e-8, "within 1e-8");
    });

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
