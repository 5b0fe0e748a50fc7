#pragma once

// Radial reductions of the fractional mean curvature flow
//   original:  r_i' = -e_i H_s(x_{r_i}, E_t)
//   rescaled:  r_i' = -e_i H_s(x_{r_i}, E_t) + r_i
// integrated with an embedded Dormand-Prince 5(4) pair.

#include <optional>
#include <string>
#include <vector>

#include "fracshrink/curvature.hpp"
#include "fracshrink/kernel_geometry.hpp"

namespace fracshrink {

enum class FlowKind { Original, Rescaled };

std::string to_string(FlowKind k);
FlowKind flow_kind_from_string(const std::string& name);

struct FlowState {
    double time = 0.0;
    std::vector<double> radii;
    bool contains_origin = false;

    RadialSet set() const { return RadialSet(radii, contains_origin); }
};

enum class Termination { Extinction, Collision, TimeBudget, Divergence, StepBudget };

struct FlowTrace {
    std::vector<FlowState> states;
    Termination termination = Termination::TimeBudget;
    /// Collision: lower index of the merging pair, or -1 when the innermost
    /// sphere reached the origin.
    int collision_index = -1;
    double divergence_threshold = 0.0;
    double termination_time = 0.0;
    /// Extinction time, exact from the self-similar completion or extrapolated
    /// from the last state otherwise.
    std::optional<double> extinction_time;
    bool closed_form_completion = false;
    int accepted_steps = 0;
    int rejected_steps = 0;

    /// "extinction", "collision(i,i+1)", "collision(origin,0)", "time_budget",
    /// "divergence(1e+06)" or "step_budget".
    std::string termination_tag() const;
};

std::vector<double> original_rhs(const CurvatureEvaluator& eval, const FlowState& state);
std::vector<double> original_rhs(const KernelParams& p, const FlowState& state,
                                 const QuadratureConfig& q = {});
std::vector<double> rescaled_rhs(const CurvatureEvaluator& eval, const FlowState& state);
std::vector<double> rescaled_rhs(const KernelParams& p, const FlowState& state,
                                 const QuadratureConfig& q = {});

struct FlowOptions {
    double ode_tol = 1e-8;
    double extinction_fraction = 1e-4;  // of the initial outer radius
    double divergence_factor = 1e6;     // of each initial radius
    /// Original flow only: hand over to the closed-form homothety once the
    /// logarithmic rates r_i' / r_i agree to within `freeze_tol` (relative)
    /// for `freeze_steps` consecutive steps.
    bool closed_form_completion = true;
    double freeze_tol = 1e-6;
    int freeze_steps = 5;
    int max_steps = 200000;
    double initial_step = 0.0;  // 0: chosen from the RHS
};

/// Never throws for collisions, extinction or blow-up; those end the trace.
FlowTrace integrate(const KernelParams& p, const FlowState& initial, FlowKind which,
                    double horizon, const QuadratureConfig& q = {},
                    const FlowOptions& opts = {});

/// Runs independent integrations on up to `threads` workers (0: hardware
/// concurrency). Results keep the order of `initials`.
std::vector<FlowTrace> integrate_ensemble(const KernelParams& p,
                                          const std::vector<FlowState>& initials,
                                          FlowKind which, double horizon,
                                          const QuadratureConfig& q = {},
                                          const FlowOptions& opts = {}, unsigned threads = 0);

enum class DeviationPart { Full, OrthogonalToReference, AlongReference };

struct GrowthFit {
    double rate = 0.0;        // slope of log |deviation| against t
    double rms_residual = 0.0;
    int points = 0;
    double t_begin = 0.0;
    double t_end = 0.0;
    double max_deviation = 0.0;  // over the whole trace
};

/// Least-squares exponential rate of |r(t) - reference| over the states whose
/// deviation lies in [lower, upper]. Throws DomainError with fewer than three points.
GrowthFit measure_growth_rate(const FlowTrace& trace, const std::vector<double>& reference,
                              double lower = 1e-4, double upper = 1e-2,
                              DeviationPart part = DeviationPart::OrthogonalToReference);

}  // namespace fracshrink
