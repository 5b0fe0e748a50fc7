#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "fracshrink/curvature.hpp"
#include "fracshrink/errors.hpp"
#include "fracshrink/flow.hpp"
#include "fracshrink/shrinker.hpp"
#include "fracshrink/stability.hpp"
#include "json.hpp"
#include "output.hpp"

#ifndef FRACSHRINK_VERSION
#define FRACSHRINK_VERSION "unknown"
#endif

namespace fracshrink::cli {

namespace {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Output {
    std::string main;
    std::optional<std::string> summary;
    int exit_code = kExitOk;
};

// One flag <-> one JSON key <-> one RunConfig field.
struct Binding {
    std::string flag;
    std::string key;
    std::function<void(RunConfig&, const RunConfig&)> copy;
    std::function<void(RunConfig&, const json&)> load;
};

template <class T>
Binding field(std::string flag, std::string key, T RunConfig::*member) {
    return {std::move(flag), std::move(key),
            [member](RunConfig& dst, const RunConfig& src) { dst.*member = src.*member; },
            [member](RunConfig& dst, const json& j) { dst.*member = j.get<T>(); }};
}

json to_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["n"] = c.n;
    j["s"] = c.s;
    j["radii"] = c.radii;
    j["ball"] = c.ball;
    j["index"] = c.index;
    j["N"] = c.N;
    j["family"] = c.family;
    j["cylinder_k"] = c.cylinder_k;
    j["which"] = c.which;
    j["s_grid"] = c.s_grid;
    j["format"] = c.format;
    j["output"] = c.output;
    j["summary"] = c.summary;
    j["seed"] = c.seed;
    j["rel_tol"] = c.rel_tol;
    j["abs_tol"] = c.abs_tol;
    j["newton_tol"] = c.newton_tol;
    j["max_newton"] = c.max_newton;
    j["ode_tol"] = c.ode_tol;
    j["horizon"] = c.horizon;
    j["perturb"] = c.perturb;
    j["amplitude"] = c.amplitude;
    j["completion"] = c.completion;
    j["max_steps"] = c.max_steps;
    return j;
}

QuadratureConfig quadrature(const RunConfig& c) {
    QuadratureConfig q;
    q.rel_tol = c.rel_tol;
    q.abs_tol = c.abs_tol;
    return q;
}

ShrinkerOptions newton(const RunConfig& c) {
    ShrinkerOptions o;
    o.tol = c.newton_tol;
    o.max_newton_iterations = c.max_newton;
    return o;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

void validate(const RunConfig& c) {
    require(c.n != 0, "missing required option --n");
    require(c.n >= 1, "--n must be a positive integer");
    if (c.command != "limits") {
        require(c.s != 0.0, "missing required option --s");
        require(c.s > 0.0 && c.s < 1.0, "--s must lie in (0, 1)");
    }
    require(c.format == "csv" || c.format == "json", "--format must be csv or json");
    require(c.rel_tol > 0.0 && c.rel_tol < 1.0, "--rel-tol must lie in (0, 1)");
    require(c.abs_tol > 0.0, "--abs-tol must be positive");
    require(c.newton_tol > 0.0, "--newton-tol must be positive");
    require(c.max_newton >= 1, "--max-newton must be >= 1");
    require(c.N >= 1, "--N must be >= 1");
    require(c.family == "annuli-only" || c.family == "ball-plus-annuli",
            "--family must be annuli-only or ball-plus-annuli");
    for (double r : c.radii) require(r > 0.0 && std::isfinite(r), "--radii must be positive");

    if (c.command == "curvature") {
        require(!c.radii.empty(), "missing required option --radii");
        if (c.index != "all") {
            std::size_t pos = 0;
            long i = -1;
            try {
                i = std::stol(c.index, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            require(pos == c.index.size() && i >= 0 && static_cast<std::size_t>(i) < c.radii.size(),
                    "--index must be 'all' or a 0-based index below the number of radii");
        }
    }
    if (c.command == "shrink" && c.cylinder_k != 0)
        require(c.cylinder_k >= 1 && c.cylinder_k < c.n, "--cylinder-k must satisfy 1 <= k < n");
    if (c.command == "flow") {
        require(c.which == "original" || c.which == "rescaled", "--which must be original or rescaled");
        require(c.ode_tol > 0.0 && c.ode_tol < 1.0, "--ode-tol must lie in (0, 1)");
        require(c.horizon >= 0.0, "--horizon must be >= 0");
        require(c.perturb == "none" || c.perturb == "unstable" || c.perturb == "scale" ||
                    c.perturb == "random",
                "--perturb must be none, unstable, scale or random");
        require(c.amplitude > 0.0 && std::isfinite(c.amplitude), "--amplitude must be positive");
        require(c.max_steps >= 1, "--max-steps must be >= 1");
        if (!c.radii.empty())
            require(c.perturb == "none" || c.perturb == "random",
                    "--perturb " + c.perturb + " needs a shrinker start, not --radii");
    }
    if (c.command == "limits") {
        require(!c.s_grid.empty(), "missing required option --s-grid");
        for (double s : c.s_grid) require(s > 0.0 && s < 1.0, "--s-grid values must lie in (0, 1)");
        require(std::is_sorted(c.s_grid.begin(), c.s_grid.end()), "--s-grid must be increasing");
    }
}

std::vector<std::string> header_comments(const RunConfig& c) {
    return {std::string("version=") + FRACSHRINK_VERSION, "command=" + c.command,
            "config=" + to_json(c).dump()};
}

json document(const RunConfig& c, json result) {
    json j;
    j["schema"] = kCsvSchema;
    j["version"] = FRACSHRINK_VERSION;
    j["command"] = c.command;
    j["config"] = to_json(c);
    j["result"] = std::move(result);
    return j;
}

std::string render(const json& j) { return j.dump(2) + "\n"; }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

RadialSet set_from_flags(const RunConfig& c) { return RadialSet(c.radii, c.ball); }

// ---------------------------------------------------------------------------

Output cmd_curvature(const RunConfig& c) {
    const KernelParams p(c.n, c.s);
    const RadialSet set = set_from_flags(c);
    const CurvatureEvaluator eval(p, quadrature(c));
    std::vector<std::size_t> which;
    if (c.index == "all") {
        for (std::size_t i = 0; i < set.size(); ++i) which.push_back(i);
    } else {
        which.push_back(static_cast<std::size_t>(std::stoul(c.index)));
    }

    json values = json::array();
    CsvTable t;
    t.comments = header_comments(c);
    t.comments.push_back("ball_constant=" + format_number(eval.ball_constant()));
    t.header = {"index", "radius", "orientation", "value", "error_estimate", "decomposition"};
    for (std::size_t i : which) {
        const CurvatureValue v = eval.at(set, i);
        json terms = json::array();
        std::vector<std::string> parts;
        for (const auto& term : v.decomposition) {
            terms.push_back({{"label", term.label}, {"value", number_or_null(term.value)}});
            parts.push_back(term.label + "=" + format_number(term.value));
        }
        values.push_back({{"index", i},
                          {"radius", set.radius(i)},
                          {"orientation", set.orientation(i)},
                          {"value", number_or_null(v.value)},
                          {"error_estimate", number_or_null(v.error_estimate)},
                          {"decomposition", terms}});
        t.add_row({std::to_string(i), cell(set.radius(i)), std::to_string(set.orientation(i)),
                   cell(v.value), cell(v.error_estimate), join(parts, ";")});
    }
    if (c.format == "json") {
        json r = {{"ball_constant", eval.ball_constant()},
                  {"radii", set.radii()},
                  {"contains_origin", set.contains_origin()},
                  {"values", values}};
        return {render(document(c, r)), std::nullopt, kExitOk};
    }
    return {t.render(), std::nullopt, kExitOk};
}

ShrinkerSolution solve(const RunConfig& c) {
    const QuadratureConfig q = quadrature(c);
    const Family fam = family_from_string(c.family);
    if (c.cylinder_k != 0)
        return cylinder_shrinker(c.n, c.cylinder_k, c.s, c.N, fam, q, newton(c));
    return find_shrinker(KernelParams(c.n, c.s), c.N, fam, q, newton(c));
}

Output cmd_shrink(const RunConfig& c) {
    const ShrinkerSolution sol = solve(c);
    const std::vector<double> g = residual_system(sol.params, sol.set, quadrature(c));
    const std::vector<double> ratios = sol.ratios();
    const bool cyl = sol.ambient_dimension != 0;

    if (c.format == "json") {
        json r;
        r["family"] = to_string(sol.family);
        r["N"] = sol.N;
        r["dimension"] = sol.params.n();
        r["radii"] = sol.set.radii();
        r["ratios"] = ratios;
        r["contains_origin"] = sol.set.contains_origin();
        r["residual_norm"] = number_or_null(sol.residual_norm);
        r["residuals"] = g;
        r["solver_path"] = sol.solver_path;
        r["extra_roots"] = sol.extra_roots;
        if (cyl) {
            std::vector<double> ambient = sol.set.radii();
            for (double& x : ambient) x *= sol.ambient_scale;
            r["cylinder"] = {{"ambient_dimension", sol.ambient_dimension},
                             {"cross_section_dimension", sol.params.n()},
                             {"ambient_scale", sol.ambient_scale},
                             {"ambient_radii", ambient}};
        } else {
            r["cylinder"] = nullptr;
        }
        return {render(document(c, r)), std::nullopt, kExitOk};
    }

    CsvTable t;
    t.comments = header_comments(c);
    t.comments.push_back("family=" + to_string(sol.family));
    t.comments.push_back("N=" + std::to_string(sol.N));
    t.comments.push_back("residual_norm=" + format_number(sol.residual_norm));
    t.comments.push_back("solver_path=" + join(sol.solver_path, " | "));
    if (cyl) {
        t.comments.push_back("ambient_dimension=" + std::to_string(sol.ambient_dimension));
        t.comments.push_back("ambient_scale=" + format_number(sol.ambient_scale));
    }
    t.header = {"index", "radius", "ratio", "orientation", "residual"};
    if (cyl) t.header.push_back("ambient_radius");
    for (std::size_t i = 0; i < sol.set.size(); ++i) {
        std::vector<std::string> row = {std::to_string(i), cell(sol.set.radius(i)), cell(ratios[i]),
                                        std::to_string(sol.set.orientation(i)), cell(g[i])};
        if (cyl) row.push_back(cell(sol.set.radius(i) * sol.ambient_scale));
        t.add_row(std::move(row));
    }
    return {t.render(), std::nullopt, kExitOk};
}

Output cmd_stability(const RunConfig& c) {
    const KernelParams p(c.n, c.s);
    const ShrinkerSolution sol = find_shrinker(p, c.N, family_from_string(c.family), quadrature(c),
                                               newton(c));
    const StabilityReport rep = analyze_stability(p, sol, quadrature(c));
    const auto m = static_cast<Eigen::Index>(sol.set.size());

    if (c.format == "json") {
        json r;
        r["radii"] = sol.set.radii();
        r["family"] = to_string(sol.family);
        r["N"] = sol.N;
        r["residual_norm"] = number_or_null(sol.residual_norm);
        r["eigenvalues"] = rep.eigenvalues;
        json vecs = json::array();
        for (const auto& v : rep.eigenvectors)
            vecs.push_back(std::vector<double>(v.data(), v.data() + v.size()));
        r["eigenvectors"] = vecs;
        r["morse_index"] = rep.morse_index;
        r["radial_eigen_defect"] = number_or_null(rep.radial_eigen_defect);
        r["symmetrization_defect"] = number_or_null(rep.symmetrization_defect);
        if (rep.unstable_direction.size() > 0)
            r["unstable_direction"] = std::vector<double>(
                rep.unstable_direction.data(),
                rep.unstable_direction.data() + rep.unstable_direction.size());
        else
            r["unstable_direction"] = nullptr;
        json jac = json::array();
        for (Eigen::Index i = 0; i < m; ++i) {
            std::vector<double> row;
            for (Eigen::Index j = 0; j < m; ++j) row.push_back(rep.jacobian(i, j));
            jac.push_back(row);
        }
        r["jacobian"] = jac;
        return {render(document(c, r)), std::nullopt, kExitOk};
    }

    CsvTable t;
    t.comments = header_comments(c);
    t.comments.push_back("morse_index=" + std::to_string(rep.morse_index));
    t.comments.push_back("radial_eigen_defect=" + format_number(rep.radial_eigen_defect));
    t.comments.push_back("symmetrization_defect=" + format_number(rep.symmetrization_defect));
    std::vector<std::string> radii;
    for (double r : sol.set.radii()) radii.push_back(format_number(r));
    t.comments.push_back("radii=" + join(radii, " "));
    t.header = {"index", "eigenvalue"};
    for (Eigen::Index j = 0; j < m; ++j) t.header.push_back("v_" + std::to_string(j));
    for (std::size_t k = 0; k < rep.eigenvalues.size(); ++k) {
        std::vector<std::string> row = {std::to_string(k), cell(rep.eigenvalues[k])};
        for (Eigen::Index j = 0; j < m; ++j) row.push_back(cell(rep.eigenvectors[k](j)));
        t.add_row(std::move(row));
    }
    return {t.render(), std::nullopt, kExitOk};
}

Output cmd_flow(const RunConfig& c) {
    const KernelParams p(c.n, c.s);
    const QuadratureConfig q = quadrature(c);
    const FlowKind which = flow_kind_from_string(c.which);

    std::optional<ShrinkerSolution> reference;
    std::optional<StabilityReport> rep;
    FlowState init;
    if (!c.radii.empty()) {
        const RadialSet set = set_from_flags(c);
        init = FlowState{0.0, set.radii(), set.contains_origin()};
    } else {
        reference = find_shrinker(p, c.N, family_from_string(c.family), q, newton(c));
        init = FlowState{0.0, reference->set.radii(), reference->set.contains_origin()};
    }

    const std::size_t m = init.radii.size();
    std::optional<double> expected_rate;
    DeviationPart part = DeviationPart::Full;
    if (c.perturb == "unstable") {
        rep = analyze_stability(p, *reference, q);
        if (rep->unstable_direction.size() == 0)
            throw ConfigError("--perturb unstable needs at least two radii; the ball has no shape mode");
        for (std::size_t i = 0; i < m; ++i)
            init.radii[i] += c.amplitude * rep->unstable_direction(static_cast<Eigen::Index>(i));
        expected_rate = rep->eigenvalues.front();
        part = DeviationPart::OrthogonalToReference;
    } else if (c.perturb == "scale") {
        for (double& r : init.radii) r *= 1.0 + c.amplitude;
        expected_rate = c.s + 1.0;
        part = DeviationPart::AlongReference;
    } else if (c.perturb == "random") {
        std::mt19937_64 rng(c.seed);
        std::normal_distribution<double> normal;
        std::vector<double> d(m);
        double norm = 0.0;
        for (double& x : d) {
            x = normal(rng);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < m; ++i) init.radii[i] += c.amplitude * d[i] / norm;
    }
    if (!std::is_sorted(init.radii.begin(), init.radii.end()) || init.radii.front() <= 0.0)
        throw ConfigError("perturbed radii are not admissible; lower --amplitude");

    FlowOptions opts;
    opts.ode_tol = c.ode_tol;
    opts.closed_form_completion = c.completion;
    opts.max_steps = c.max_steps;
    const double horizon = c.horizon > 0.0 ? c.horizon : (which == FlowKind::Original ? 1e3 : 30.0);
    const FlowTrace trace = integrate(p, init, which, horizon, q, opts);

    json summary;
    summary["schema"] = kCsvSchema;
    summary["version"] = FRACSHRINK_VERSION;
    summary["config"] = to_json(c);
    summary["termination"] = trace.termination_tag();
    summary["termination_time"] = trace.termination_time;
    summary["extinction_time"] = number_or_null(trace.extinction_time);
    summary["closed_form_completion"] = trace.closed_form_completion;
    summary["accepted_steps"] = trace.accepted_steps;
    summary["rejected_steps"] = trace.rejected_steps;
    summary["initial_radii"] = init.radii;
    summary["reference_radii"] = reference ? json(reference->set.radii()) : json(nullptr);
    summary["growth_rate_expected"] = number_or_null(expected_rate);
    summary["growth_rate"] = nullptr;
    if (reference && c.perturb != "none") {
        try {
            const GrowthFit fit = measure_growth_rate(trace, reference->set.radii(), c.amplitude,
                                                      100.0 * c.amplitude, part);
            summary["growth_rate"] = number_or_null(fit.rate);
            summary["growth_fit"] = {{"points", fit.points},
                                     {"t_begin", fit.t_begin},
                                     {"t_end", fit.t_end},
                                     {"rms_residual", fit.rms_residual},
                                     {"window", {c.amplitude, 100.0 * c.amplitude}}};
        } catch (const std::exception& e) {
            summary["growth_rate_error"] = e.what();
        }
    }

    const int code = trace.termination == Termination::StepBudget ? kExitBudget : kExitOk;
    if (c.format == "json") {
        json states = json::array();
        for (const auto& st : trace.states) states.push_back({{"t", st.time}, {"radii", st.radii}});
        json r = {{"contains_origin", init.contains_origin}, {"states", states}, {"summary", summary}};
        return {render(document(c, r)), std::nullopt, code};
    }

    CsvTable t;
    t.comments = header_comments(c);
    t.comments.push_back("termination=" + trace.termination_tag());
    t.header = {"t"};
    for (std::size_t i = 1; i <= m; ++i) t.header.push_back("r_" + std::to_string(i));
    for (const auto& st : trace.states) {
        std::vector<std::string> row = {cell(st.time)};
        for (double r : st.radii) row.push_back(cell(r));
        t.add_row(std::move(row));
    }
    return {t.render(), render(summary), code};
}

Output cmd_limits(const RunConfig& c) {
    const LimitTable table = limit_study(c.n, c.s_grid, quadrature(c), c.threads);
    if (c.format == "json") {
        json rows = json::array();
        for (const auto& row : table.rows) {
            json r = {{"s", row.s},
                      {"annulus_ratio", number_or_null(row.annulus_ratio)},
                      {"scaled_ball_constant", number_or_null(row.scaled_ball_constant)},
                      {"scaled_defect", number_or_null(row.scaled_defect)}};
            r["error"] = row.error.empty() ? json(nullptr) : json(row.error);
            rows.push_back(r);
        }
        json r = {{"n", table.n},
                  {"probe_radius", table.probe_radius},
                  {"classical_ball_limit", table.classical_ball_limit},
                  {"classical_defect_limit", table.classical_defect_limit},
                  {"rows", rows}};
        return {render(document(c, r)), std::nullopt, kExitOk};
    }
    CsvTable t;
    t.comments = header_comments(c);
    t.comments.push_back("probe_radius=" + format_number(table.probe_radius));
    t.comments.push_back("classical_ball_limit=" + format_number(table.classical_ball_limit));
    t.comments.push_back("classical_defect_limit=" + format_number(table.classical_defect_limit));
    t.header = {"s", "annulus_ratio", "scaled_ball_constant", "scaled_defect", "error"};
    for (const auto& row : table.rows)
        t.add_row({cell(row.s), cell(row.annulus_ratio), cell(row.scaled_ball_constant),
                   cell(row.scaled_defect), row.error});
    return {t.render(), std::nullopt, kExitOk};
}

// ---------------------------------------------------------------------------

struct Parsed {
    RunConfig flags;
    std::string config_path;
    bool no_completion = false;
    std::vector<Binding> bindings;
};

void apply_file(RunConfig& dst, const std::string& path, const std::vector<Binding>& bindings,
                const CLI::App* sub) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "command") continue;
        auto it = std::find_if(bindings.begin(), bindings.end(),
                               [&](const Binding& b) {
                                   return b.key == key && sub->get_option_no_throw(b.flag);
                               });
        if (it == bindings.end())
            throw ConfigError("config file key '" + key + "' is not an option of this command");
        try {
            if (key == "index" && value.is_number_integer())
                dst.index = std::to_string(value.get<long>());
            else
                it->load(dst, value);
        } catch (const json::exception&) {
            throw ConfigError("config file key '" + key + "' has the wrong type");
        }
    }
}

unsigned threads_from_env() {
    const char* v = std::getenv("FRACSHRINK_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 0) throw ConfigError("FRACSHRINK_THREADS must be a non-negative integer");
    return static_cast<unsigned>(n);  // 0 = hardware concurrency
}

void add_common(CLI::App* sub, Parsed& ps, bool with_s = true) {
    RunConfig& f = ps.flags;
    auto bind = [&](CLI::Option*, Binding b) { ps.bindings.push_back(std::move(b)); };
    bind(sub->add_option("--n", f.n, "Ambient dimension"), field("--n", "n", &RunConfig::n));
    if (with_s)
        bind(sub->add_option("--s", f.s, "Fractional order in (0, 1)"),
             field("--s", "s", &RunConfig::s));
    sub->add_option("--config", ps.config_path, "JSON file with option values; flags override it");
    bind(sub->add_option("--format", f.format, "csv or json"),
         field("--format", "format", &RunConfig::format));
    bind(sub->add_option("--output", f.output, "Output path (default stdout)"),
         field("--output", "output", &RunConfig::output));
    bind(sub->add_option("--rel-tol", f.rel_tol, "Quadrature relative tolerance"),
         field("--rel-tol", "rel_tol", &RunConfig::rel_tol));
    bind(sub->add_option("--abs-tol", f.abs_tol, "Quadrature absolute tolerance"),
         field("--abs-tol", "abs_tol", &RunConfig::abs_tol));
    bind(sub->add_option("--seed", f.seed, "Random seed"), field("--seed", "seed", &RunConfig::seed));
}

void add_set(CLI::App* sub, Parsed& ps) {
    RunConfig& f = ps.flags;
    sub->add_option("--radii", f.radii, "Boundary radii, comma separated")->delimiter(',');
    ps.bindings.push_back(field("--radii", "radii", &RunConfig::radii));
    sub->add_flag("--ball", f.ball, "The set contains the origin");
    ps.bindings.push_back(field("--ball", "ball", &RunConfig::ball));
}

void add_shrinker(CLI::App* sub, Parsed& ps) {
    RunConfig& f = ps.flags;
    sub->add_option("--N", f.N, "Number of annuli");
    ps.bindings.push_back(field("--N", "N", &RunConfig::N));
    sub->add_option("--family", f.family, "annuli-only or ball-plus-annuli");
    ps.bindings.push_back(field("--family", "family", &RunConfig::family));
    sub->add_option("--newton-tol", f.newton_tol, "Target max |g_i|");
    ps.bindings.push_back(field("--newton-tol", "newton_tol", &RunConfig::newton_tol));
    sub->add_option("--max-newton", f.max_newton, "Newton iteration budget");
    ps.bindings.push_back(field("--max-newton", "max_newton", &RunConfig::max_newton));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fractional mean curvature of radial sets, self-shrinkers, stability and flows",
                 "fracshrink"};
    app.set_version_flag("--version", FRACSHRINK_VERSION);
    app.require_subcommand(1, 1);

    Parsed ps;
    RunConfig& f = ps.flags;

    CLI::App* curv = app.add_subcommand("curvature", "Fractional mean curvature at boundary spheres");
    add_common(curv, ps);
    add_set(curv, ps);
    curv->add_option("--index", f.index, "0-based boundary index or 'all'");
    ps.bindings.push_back(field("--index", "index", &RunConfig::index));

    CLI::App* shrink = app.add_subcommand("shrink", "Self-shrinking radial sets");
    add_common(shrink, ps);
    add_shrinker(shrink, ps);
    shrink->add_option("--cylinder-k", f.cylinder_k, "Cross-section dimension of a cylinder");
    ps.bindings.push_back(field("--cylinder-k", "cylinder_k", &RunConfig::cylinder_k));

    CLI::App* stab = app.add_subcommand("stability", "Jacobian spectrum at a self-shrinker");
    add_common(stab, ps);
    add_shrinker(stab, ps);

    CLI::App* flow = app.add_subcommand("flow", "Integrate the original or rescaled radial flow");
    add_common(flow, ps);
    add_set(flow, ps);
    add_shrinker(flow, ps);
    flow->add_option("--which", f.which, "original or rescaled");
    ps.bindings.push_back(field("--which", "which", &RunConfig::which));
    flow->add_option("--horizon", f.horizon, "Final time (0: flow-specific default)");
    ps.bindings.push_back(field("--horizon", "horizon", &RunConfig::horizon));
    flow->add_option("--ode-tol", f.ode_tol, "Local error tolerance");
    ps.bindings.push_back(field("--ode-tol", "ode_tol", &RunConfig::ode_tol));
    flow->add_option("--perturb", f.perturb, "none, unstable, scale or random");
    ps.bindings.push_back(field("--perturb", "perturb", &RunConfig::perturb));
    flow->add_option("--amplitude", f.amplitude, "Perturbation size");
    ps.bindings.push_back(field("--amplitude", "amplitude", &RunConfig::amplitude));
    flow->add_flag("--no-completion", ps.no_completion,
                   "Integrate to the extinction threshold without the closed-form homothety");
    ps.bindings.push_back({"--no-completion", "completion",
                           [&ps](RunConfig& dst, const RunConfig&) { dst.completion = !ps.no_completion; },
                           [](RunConfig& dst, const json& j) { dst.completion = j.get<bool>(); }});
    flow->add_option("--max-steps", f.max_steps, "Accepted-step budget");
    ps.bindings.push_back(field("--max-steps", "max_steps", &RunConfig::max_steps));
    flow->add_option("--summary", f.summary, "Summary JSON path");
    ps.bindings.push_back(field("--summary", "summary", &RunConfig::summary));

    CLI::App* lim = app.add_subcommand("limits", "Annulus ratio and scaled constants along an s grid");
    add_common(lim, ps, false);
    lim->add_option("--s-grid", f.s_grid, "Increasing s values, comma separated")->delimiter(',');
    ps.bindings.push_back(field("--s-grid", "s_grid", &RunConfig::s_grid));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    RunConfig cfg;
    try {
        cfg.command = sub->get_name();
        if (!ps.config_path.empty()) apply_file(cfg, ps.config_path, ps.bindings, sub);
        for (const auto& b : ps.bindings)
            if (sub->get_option_no_throw(b.flag) && sub->count(b.flag) > 0) b.copy(cfg, f);
        cfg.threads = threads_from_env();
        validate(cfg);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        Output o;
        if (cfg.command == "curvature") o = cmd_curvature(cfg);
        else if (cfg.command == "shrink") o = cmd_shrink(cfg);
        else if (cfg.command == "stability") o = cmd_stability(cfg);
        else if (cfg.command == "flow") o = cmd_flow(cfg);
        else o = cmd_limits(cfg);

        write_atomically(cfg.output, o.main, out);
        if (o.summary) {
            if (!cfg.summary.empty()) write_atomically(cfg.summary, *o.summary, out);
            else if (!cfg.output.empty()) write_atomically(cfg.output + ".summary.json", *o.summary, out);
            else err << *o.summary;
        }
        if (o.exit_code == kExitBudget) err << "error: step budget exhausted before the horizon\n";
        return o.exit_code;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConvergenceFailure& e) {
        err << "error: " << e.what() << " (residual " << e.residual() << ")\n";
        return kExitBudget;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace fracshrink::cli
