#include "fracshrink/flow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "fracshrink/errors.hpp"
#include "fracshrink/shrinker.hpp"

namespace fracshrink {

namespace {

using Vec = std::vector<double>;

// Dormand-Prince 5(4), FSAL. Both systems are autonomous, so the nodes c_i are not needed.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Fifth-order minus embedded fourth-order weights.
constexpr double kE[7] = {71.0 / 57600,      0.0,         -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

double dot(const Vec& a, const Vec& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double min_relative_gap(const Vec& y, std::size_t* where) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        const double gap = (y[i + 1] - y[i]) / y[i + 1];
        if (gap < best) {
            best = gap;
            *where = i;
        }
    }
    return best;
}

// Spread of the logarithmic rates f_i / y_i relative to the homothety rate
// f.y / y.y; zero exactly when the velocity is a homothety. Independent of
// the step size, unlike the change of r_i / r_max per step.
double homothety_spread(const Vec& y, const Vec& f) {
    const double c = dot(f, y) / dot(y, y);
    double spread = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) spread = std::max(spread, std::abs(f[i] / y[i] - c));
    return spread / std::abs(c);
}

struct Integrator {
    const CurvatureEvaluator& eval;
    FlowKind which;
    bool origin;

    Vec rhs(const Vec& y) const {
        const FlowState st{0.0, y, origin};
        return which == FlowKind::Original ? original_rhs(eval, st) : rescaled_rhs(eval, st);
    }
};

void push_state(FlowTrace& trace, double t, const Vec& y, bool origin) {
    trace.states.push_back(FlowState{t, y, origin});
    trace.termination_time = t;
}

// Homothety r(t) = lambda(t) y with lambda^{1+s} = 1 - (1+s) kappa (t - t0),
// sampled at a geometric sequence of lambda down to the extinction threshold.
void complete_self_similar(FlowTrace& trace, const Vec& y, const Vec& f, double t0, double s,
                           double threshold, double horizon, bool origin) {
    const double kappa = -dot(f, y) / dot(y, y);
    const double extinction = t0 + 1.0 / ((1.0 + s) * kappa);
    auto time_at = [&](double lambda) {
        return t0 + (1.0 - std::pow(lambda, 1.0 + s)) / ((1.0 + s) * kappa);
    };
    auto scaled = [&](double lambda) {
        Vec out = y;
        for (double& x : out) x *= lambda;
        return out;
    };
    const double lambda_end = threshold / y.back();
    trace.closed_form_completion = true;
    trace.extinction_time = extinction;
    for (double lambda = 0.5; lambda > lambda_end; lambda *= 0.5) {
        const double t = time_at(lambda);
        if (t > horizon) break;
        push_state(trace, t, scaled(lambda), origin);
    }
    if (extinction > horizon) {
        const double lambda = std::pow(1.0 - (1.0 + s) * kappa * (horizon - t0), 1.0 / (1.0 + s));
        if (horizon > trace.termination_time) push_state(trace, horizon, scaled(lambda), origin);
        trace.termination = Termination::TimeBudget;
        return;
    }
    if (lambda_end < 1.0) push_state(trace, time_at(lambda_end), scaled(lambda_end), origin);
    push_state(trace, extinction, Vec(y.size(), 0.0), origin);
    trace.termination = Termination::Extinction;
}

}  // namespace

std::string to_string(FlowKind k) { return k == FlowKind::Original ? "original" : "rescaled"; }

FlowKind flow_kind_from_string(const std::string& name) {
    if (name == "original") return FlowKind::Original;
    if (name == "rescaled") return FlowKind::Rescaled;
    throw DomainError("unknown flow '" + name + "' (expected original or rescaled)");
}

std::string FlowTrace::termination_tag() const {
    char buf[64];
    switch (termination) {
        case Termination::Extinction:
            return "extinction";
        case Termination::Collision:
            if (collision_index < 0) return "collision(origin,0)";
            std::snprintf(buf, sizeof buf, "collision(%d,%d)", collision_index,
                          collision_index + 1);
            return buf;
        case Termination::TimeBudget:
            return "time_budget";
        case Termination::Divergence:
            std::snprintf(buf, sizeof buf, "divergence(%g)", divergence_threshold);
            return buf;
        case Termination::StepBudget:
            return "step_budget";
    }
    return "unknown";
}

std::vector<double> original_rhs(const CurvatureEvaluator& eval, const FlowState& state) {
    const RadialSet set = state.set();
    Vec v = eval.all(set);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= -set.orientation(i);
    return v;
}

std::vector<double> original_rhs(const KernelParams& p, const FlowState& state,
                                 const QuadratureConfig& q) {
    return original_rhs(CurvatureEvaluator(p, q), state);
}

std::vector<double> rescaled_rhs(const CurvatureEvaluator& eval, const FlowState& state) {
    return residual_system(eval, state.set());
}

std::vector<double> rescaled_rhs(const KernelParams& p, const FlowState& state,
                                 const QuadratureConfig& q) {
    return rescaled_rhs(CurvatureEvaluator(p, q), state);
}

FlowTrace integrate(const KernelParams& p, const FlowState& initial, FlowKind which,
                    double horizon, const QuadratureConfig& q, const FlowOptions& opts) {
    if (!(opts.ode_tol > 0.0 && opts.ode_tol < 1.0)) throw DomainError("ode_tol must lie in (0, 1)");
    if (!(horizon > initial.time)) throw DomainError("horizon must exceed the initial time");
    initial.set().check_separation();

    QuadratureConfig qq = q;
    qq.rel_tol = std::min(q.rel_tol, 1e-10);
    const CurvatureEvaluator eval(p, qq);
    const Integrator ode{eval, which, initial.contains_origin};
    const bool origin = initial.contains_origin;
    const std::size_t m = initial.radii.size();
    const double s = p.s();

    FlowTrace trace;
    trace.divergence_threshold = opts.divergence_factor;
    const Vec y0 = initial.radii;
    const double extinction_radius = opts.extinction_fraction * y0.back();

    double t = initial.time;
    Vec y = y0;
    Vec f = ode.rhs(y);
    push_state(trace, t, y, origin);

    double h = opts.initial_step;
    if (!(h > 0.0)) {
        double rate = 0.0;
        for (std::size_t i = 0; i < m; ++i) rate = std::max(rate, std::abs(f[i]) / y[i]);
        h = 0.01 / std::max(rate, 1e-12) * std::pow(opts.ode_tol / 1e-8, 0.2);
    }

    int frozen = 0;
    std::vector<Vec> k(7, Vec(m));
    Vec stage(m);
    Vec y5(m);

    auto finish_extinction = [&] {
        trace.termination = Termination::Extinction;
        // Remaining time if the last state shrank self-similarly.
        trace.extinction_time = t + y.back() / ((1.0 + s) * std::abs(f.back()));
    };

    while (true) {
        if (trace.accepted_steps >= opts.max_steps) {
            trace.termination = Termination::StepBudget;
            return trace;
        }
        const double h_min = 64.0 * std::numeric_limits<double>::epsilon() *
                             std::max(std::abs(t), 1e-3 * std::abs(horizon));
        if (h < h_min) {
            // Step-size collapse: name the singular event the state is heading into.
            std::size_t where = 0;
            const double gap = min_relative_gap(y, &where);
            if (m > 1 && y.front() / y.back() < 1e-3) {
                trace.termination = Termination::Collision;
                trace.collision_index = -1;
            } else if (gap < 1e-3) {
                trace.termination = Termination::Collision;
                trace.collision_index = static_cast<int>(where);
            } else if (y.back() < 1e-2 * y0.back()) {
                finish_extinction();
            } else {
                throw NumericalError("step size underflow at t = " + std::to_string(t) +
                                     " away from any singular event");
            }
            return trace;
        }

        const bool last = t + h >= horizon;
        const double step = last ? horizon - t : h;
        bool ok = true;
        k[0] = f;
        try {
            for (int st = 1; st < 7; ++st) {
                for (std::size_t i = 0; i < m; ++i) {
                    double acc = 0.0;
                    for (int j = 0; j < st; ++j) acc += kA[st][j] * k[static_cast<std::size_t>(j)][i];
                    stage[i] = y[i] + step * acc;
                }
                if (st == 6) y5 = stage;
                k[static_cast<std::size_t>(st)] = ode.rhs(stage);
            }
        } catch (const DomainError&) {
            ok = false;  // stage left the admissible cone
        } catch (const NumericalError&) {
            ok = false;  // degenerate gap or quadrature failure at a stage
        }
        if (!ok) {
            ++trace.rejected_steps;
            h = 0.25 * step;
            continue;
        }

        double err = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double e = 0.0;
            for (int j = 0; j < 7; ++j) e += kE[j] * k[static_cast<std::size_t>(j)][i];
            const double scale = opts.ode_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(step * e) / scale);
        }
        if (!(err <= 1.0)) {
            ++trace.rejected_steps;
            h = step * (std::isfinite(err) ? std::max(0.1, 0.9 * std::pow(err, -0.2)) : 0.1);
            continue;
        }

        t = last ? horizon : t + step;
        y = y5;
        f = k[6];
        ++trace.accepted_steps;
        push_state(trace, t, y, origin);
        h = step * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));

        for (std::size_t i = 0; i < m; ++i) {
            if (y[i] > opts.divergence_factor * y0[i]) {
                trace.termination = Termination::Divergence;
                return trace;
            }
        }
        if (y.back() < extinction_radius) {
            finish_extinction();
            return trace;
        }
        if (m > 1 && y.front() < kDegeneracyGuard * y.back()) {
            trace.termination = Termination::Collision;
            trace.collision_index = -1;
            return trace;
        }
        if (last) {
            trace.termination = Termination::TimeBudget;
            return trace;
        }

        if (which == FlowKind::Original && opts.closed_form_completion) {
            frozen = homothety_spread(y, f) < opts.freeze_tol ? frozen + 1 : 0;
            if (frozen >= opts.freeze_steps && dot(f, y) < 0.0) {
                complete_self_similar(trace, y, f, t, s, extinction_radius, horizon, origin);
                return trace;
            }
        }
    }
}

std::vector<FlowTrace> integrate_ensemble(const KernelParams& p,
                                          const std::vector<FlowState>& initials,
                                          FlowKind which, double horizon,
                                          const QuadratureConfig& q, const FlowOptions& opts,
                                          unsigned threads) {
    std::vector<FlowTrace> out(initials.size());
    std::vector<std::exception_ptr> errors(initials.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(initials.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < initials.size(); i = next++) {
            try {
                out[i] = integrate(p, initials[i], which, horizon, q, opts);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker);
        worker();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

GrowthFit measure_growth_rate(const FlowTrace& trace, const std::vector<double>& reference,
                              double lower, double upper, DeviationPart part) {
    if (!(lower > 0.0 && upper > lower)) throw DomainError("need 0 < lower < upper");
    const std::size_t m = reference.size();
    const double ref_norm = std::sqrt(dot(reference, reference));

    GrowthFit fit;
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::vector<std::pair<double, double>> pts;
    for (const FlowState& state : trace.states) {
        if (state.radii.size() != m) throw DomainError("trace and reference sizes differ");
        Vec d(m);
        for (std::size_t i = 0; i < m; ++i) d[i] = state.radii[i] - reference[i];
        const double along = dot(d, reference) / ref_norm;
        double norm = 0.0;
        switch (part) {
            case DeviationPart::Full:
                norm = std::sqrt(dot(d, d));
                break;
            case DeviationPart::AlongReference:
                norm = std::abs(along);
                break;
            case DeviationPart::OrthogonalToReference:
                norm = std::sqrt(std::max(0.0, dot(d, d) - along * along));
                break;
        }
        fit.max_deviation = std::max(fit.max_deviation, norm);
        // A small slack keeps a start placed exactly on the lower edge.
        if (norm >= lower * (1.0 - 1e-9) && norm <= upper) pts.emplace_back(state.time, std::log(norm));
    }
    if (pts.size() < 3)
        throw DomainError("fewer than three trace points inside the deviation window");
    for (const auto& [t, y] : pts) {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    const double n = static_cast<double>(pts.size());
    fit.rate = (n * sty - st * sy) / (n * stt - st * st);
    const double intercept = (sy - fit.rate * st) / n;
    double ss = 0.0;
    for (const auto& [t, y] : pts) ss += std::pow(y - intercept - fit.rate * t, 2);
    fit.rms_residual = std::sqrt(ss / n);
    fit.points = static_cast<int>(pts.size());
    fit.t_begin = pts.front().first;
    fit.t_end = pts.back().first;
    return fit;
}

}  // namespace fracshrink
