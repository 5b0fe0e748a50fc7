#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fracshrink::cli {

// Stable exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitBudget = 4;

/// Fully resolved run configuration: defaults, then the --config file, then flags.
struct RunConfig {
    std::string command;
    int n = 0;  // 0 = unset
    double s = 0.0;
    std::vector<double> radii;
    bool ball = false;
    std::string index = "all";  // 0-based boundary index or "all"
    int N = 1;
    std::string family = "annuli-only";
    int cylinder_k = 0;  // 0 = no cylinder
    std::string which = "original";
    std::vector<double> s_grid;
    std::string format = "csv";
    std::string output;   // empty = stdout
    std::string summary;  // flow only; empty = <output>.summary.json or stderr
    std::uint64_t seed = 0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double newton_tol = 1e-8;
    int max_newton = 60;
    double ode_tol = 1e-8;
    double horizon = 0.0;  // 0 = per-flow default
    std::string perturb = "none";  // none | unstable | scale | random
    double amplitude = 1e-4;
    bool completion = true;
    int max_steps = 200000;
    unsigned threads = 1;  // from FRACSHRINK_THREADS
};

/// Entry point shared by the executable and the tests. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fracshrink::cli
