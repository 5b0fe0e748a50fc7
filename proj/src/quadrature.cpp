#include "quadrature.hpp"

#include <queue>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fracshrink::detail {

namespace bq = boost::math::quadrature;

Panel gauss_kronrod_21(const std::function<double(double)>& f, double a, double b) {
    const auto& xk = bq::gauss_kronrod<double, 21>::abscissa();
    const auto& wk = bq::gauss_kronrod<double, 21>::weights();
    const auto& wg = bq::gauss<double, 10>::weights();

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    std::array<double, 21> fv{};
    fv[0] = f(center);
    for (std::size_t i = 1; i < xk.size(); ++i) {
        fv[2 * i - 1] = f(center - half * xk[i]);
        fv[2 * i] = f(center + half * xk[i]);
    }

    double kronrod = wk[0] * fv[0];
    double gauss = 0.0;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const double pair = fv[2 * i - 1] + fv[2 * i];
        kronrod += wk[i] * pair;
        if (i % 2 == 1) gauss += wg[(i - 1) / 2] * pair;
    }

    // QUADPACK qk21 error heuristic
    const double mean = 0.5 * kronrod;
    double asc = wk[0] * std::abs(fv[0] - mean);
    for (std::size_t i = 1; i < xk.size(); ++i)
        asc += wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));
    asc *= std::abs(half);

    double err = std::abs((kronrod - gauss) * half);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * std::abs(kronrod * half));

    return {a, b, kronrod * half, err};
}

Estimate adaptive_gauss_kronrod(const std::function<double(double)>& f,
                                std::span<const double> breakpoints, double rel_tol,
                                double abs_tol, int max_subdivisions) {
    auto by_error = [](const Panel& x, const Panel& y) { return x.error < y.error; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(by_error)> work(by_error);

    Estimate total;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i + 1] > breakpoints[i])) continue;
        Panel p = gauss_kronrod_21(f, breakpoints[i], breakpoints[i + 1]);
        total.value += p.value;
        total.error += p.error;
        work.push(p);
    }

    for (int used = 0; used < max_subdivisions && !work.empty(); ++used) {
        if (within(total, rel_tol, abs_tol)) break;
        const Panel worst = work.top();
        work.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            work.push(worst);
            break;
        }
        const Panel left = gauss_kronrod_21(f, worst.a, mid);
        const Panel right = gauss_kronrod_21(f, mid, worst.b);
        total.value += left.value + right.value - worst.value;
        total.error += left.error + right.error - worst.error;
        work.push(left);
        work.push(right);
    }

    // Re-sum to shed the drift of incremental updates.
    Estimate exact;
    while (!work.empty()) {
        exact.value += work.top().value;
        exact.error += work.top().error;
        work.pop();
    }
    return exact;
}

std::vector<double> graded_breakpoints(double a, double b, bool pole_at_left, double scale) {
    // Breakpoints at distance scale * (2^k - 1) from the pole-side end, i.e. at
    // distance scale * 2^k from the singularity itself.
    const double length = b - a;
    std::vector<double> offsets;
    if (scale > 0.0)
        for (double d = scale; d < length; d = 2.0 * d + scale) offsets.push_back(d);

    std::vector<double> pts{a};
    if (pole_at_left) {
        for (double d : offsets) pts.push_back(a + d);
    } else {
        for (auto it = offsets.rbegin(); it != offsets.rend(); ++it) pts.push_back(b - *it);
    }
    pts.push_back(b);
    return pts;
}

void require_tolerance(const Estimate& e, double rel_tol, double abs_tol, const char* what,
                       double slack) {
    const double requested = std::max(abs_tol, rel_tol * std::abs(e.value));
    if (!(e.error <= slack * requested) || !std::isfinite(e.value))
        throw ToleranceNotMet(std::string(what) + ": tolerance not met", e.error, requested);
}

}  // namespace fracshrink::detail
