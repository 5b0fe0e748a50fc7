#include "fracshrink/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fracshrink/errors.hpp"

namespace fracshrink {

namespace {

// K(r_i, r_j) for all i != j, with e_i e_j folded in and a factor 2.
Eigen::MatrixXd coupling_matrix(const KernelParams& p, const RadialSet& set,
                                const QuadratureConfig& q) {
    const auto m = static_cast<Eigen::Index>(set.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i == j) continue;
            const auto ui = static_cast<std::size_t>(i);
            const auto uj = static_cast<std::size_t>(j);
            const double kij = sphere_kernel_integral(p, set.radius(ui), set.radius(uj), q).value;
            a(i, j) = 2.0 * set.orientation(ui) * set.orientation(uj) * kij;
        }
    }
    return a;
}

}  // namespace

Eigen::MatrixXd residual_jacobian(const CurvatureEvaluator& eval, const RadialSet& set) {
    set.check_separation();
    const double s = eval.params().s();
    Eigen::MatrixXd a = coupling_matrix(eval.params(), set, eval.config());
    const std::vector<double> h = eval.all(set);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double ri = set.radius(i);
        // The curvature part phi_i = -e_i H_i is homogeneous of degree -s, so
        // sum_j r_j d(phi_i)/dr_j = -s phi_i (Euler).
        const double phi = -set.orientation(i) * h[i];
        double off = 0.0;
        for (std::size_t j = 0; j < set.size(); ++j)
            if (j != i) off += set.radius(j) * a(ii, static_cast<Eigen::Index>(j));
        a(ii, ii) = 1.0 + (-s * phi - off) / ri;
    }
    return a;
}

Eigen::MatrixXd jacobian(const KernelParams& p, const ShrinkerSolution& sol,
                         const QuadratureConfig& q, double stationarity_tol) {
    if (!(sol.residual_norm <= stationarity_tol))
        throw DomainError("jacobian formula needs a stationary point; residual " +
                          std::to_string(sol.residual_norm));
    const RadialSet& set = sol.set;
    set.check_separation();
    Eigen::MatrixXd a = coupling_matrix(p, set, q);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        double off = 0.0;
        for (std::size_t j = 0; j < set.size(); ++j)
            if (j != i) off += set.radius(j) * a(ii, static_cast<Eigen::Index>(j));
        a(ii, ii) = p.s() + 1.0 - off / set.radius(i);
    }
    return a;
}

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, double tol, int max_sweeps) {
    const Eigen::Index n = input.rows();
    if (input.cols() != n) throw DomainError("jacobi_eigen needs a square matrix");
    Eigen::MatrixXd a = 0.5 * (input + input.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

    auto off_norm = [&] {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) sum += a(i, j) * a(i, j);
        return std::sqrt(sum);
    };
    const double scale = std::max(a.norm(), std::numeric_limits<double>::min());

    int sweep = 0;
    for (; sweep < max_sweeps && off_norm() > tol * scale; ++sweep) {
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Rotation angle zeroing a(p, q).
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }
    if (off_norm() > 1e3 * tol * scale) throw NumericalError("Jacobi eigensolver did not converge");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    out.sweeps = sweep;
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.values(k) = a(src, src);
        out.vectors.col(k) = v.col(src).normalized();
    }
    return out;
}

StabilityReport spectrum(const Eigen::MatrixXd& jac, const std::vector<double>& radii,
                         const KernelParams& p, double symmetry_tol) {
    const auto m = static_cast<Eigen::Index>(radii.size());
    if (jac.rows() != m || jac.cols() != m)
        throw DomainError("jacobian size does not match the radius count");

    Eigen::VectorXd r(m);
    Eigen::VectorXd d(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        r(i) = radii[static_cast<std::size_t>(i)];
        d(i) = std::pow(r(i), 0.5 * (p.n() - 1));
    }
    const Eigen::MatrixXd sym = d.asDiagonal() * jac * d.cwiseInverse().asDiagonal();

    StabilityReport rep;
    rep.jacobian = jac;
    const double size = std::max(sym.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    rep.symmetrization_defect = (sym - sym.transpose()).cwiseAbs().maxCoeff() / size;
    if (rep.symmetrization_defect > symmetry_tol)
        throw NumericalError("symmetrized Jacobian is asymmetric (defect " +
                             std::to_string(rep.symmetrization_defect) + ")");

    const SymmetricEigen eig = jacobi_eigen(sym);
    for (Eigen::Index k = 0; k < m; ++k) {
        rep.eigenvalues.push_back(eig.values(k));
        Eigen::VectorXd v = d.cwiseInverse().cwiseProduct(eig.vectors.col(k));
        rep.eigenvectors.push_back(v.normalized());
        if (eig.values(k) > 0.0) ++rep.morse_index;
    }

    rep.radial_eigen_defect = (jac * r - (p.s() + 1.0) * r).norm() / r.norm();

    if (m >= 2) {
        const Eigen::VectorXd rhat = r.normalized();
        Eigen::VectorXd u = rep.eigenvectors.front();
        u -= u.dot(rhat) * rhat;
        if (u.norm() > 1e-12) {
            u.normalize();
            if (u(m - 1) < 0.0) u = -u;
            rep.unstable_direction = u;
        }
    }
    return rep;
}

StabilityReport analyze_stability(const KernelParams& p, const ShrinkerSolution& sol,
                                  const QuadratureConfig& q) {
    return spectrum(jacobian(p, sol, q), sol.set.radii(), p);
}

std::pair<double, double> corner_derivative_check(const KernelParams& p,
                                                  const ShrinkerSolution& sol,
                                                  const QuadratureConfig& q) {
    if (sol.set.size() < 2)
        throw DomainError("corner derivative check needs at least two boundary spheres");
    const Eigen::MatrixXd a = jacobian(p, sol, q);
    const Eigen::Index last = a.rows() - 1;
    return {a(last, last), p.s() + 1.0};
}

ShellMonotonicity shell_monotonicity_check(const KernelParams& p, const ShrinkerSolution& sol,
                                           int grid_size, const QuadratureConfig& q) {
    if (grid_size < 2) throw DomainError("grid_size must be >= 2");
    const double rmax = sol.set.outer_radius();
    auto h = [&](double r) { return sphere_kernel_integral(p, rmax, r, q).value; };

    ShellMonotonicity out;
    out.increasing = true;
    out.worst_margin = std::numeric_limits<double>::infinity();
    double prev = h(rmax / (grid_size + 1));
    for (int k = 2; k <= grid_size; ++k) {
        const double cur = h(rmax * k / (grid_size + 1));
        out.worst_margin = std::min(out.worst_margin, cur - prev);
        if (!(cur > prev)) out.increasing = false;
        prev = cur;
    }

    out.radii_ordered = true;
    const std::size_t m = sol.set.size();
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double lo = sol.set.radius(i - 1) * h(sol.set.radius(i - 1));
        const double hi = sol.set.radius(i) * h(sol.set.radius(i));
        if (!(lo < hi)) out.radii_ordered = false;
    }
    return out;
}

}  // namespace fracshrink
