#pragma once

// Linearization of the rescaled radial flow at its stationary points.

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fracshrink/curvature.hpp"
#include "fracshrink/shrinker.hpp"

namespace fracshrink {

/// Dg at an arbitrary admissible configuration. Off-diagonal entries are
/// 2 e_i e_j K(r_i, r_j); the diagonal follows from the degree -s homogeneity
/// of the curvature part of g, so no extra quadrature is needed.
Eigen::MatrixXd residual_jacobian(const CurvatureEvaluator& eval, const RadialSet& set);

/// Dg at a stationary solution, using the stationary-point form of the diagonal
/// s + 1 - (2 / r_i) sum_{j != i} e_i e_j r_j K(r_i, r_j).
/// Throws DomainError if sol's residual exceeds `stationarity_tol`.
Eigen::MatrixXd jacobian(const KernelParams& p, const ShrinkerSolution& sol,
                         const QuadratureConfig& q = {}, double stationarity_tol = 1e-8);

struct SymmetricEigen {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // columns, unit length
    int sweeps = 0;
};

/// Cyclic Jacobi rotations for a dense symmetric matrix.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a, double tol = 1e-15, int max_sweeps = 100);

struct StabilityReport {
    Eigen::MatrixXd jacobian;
    std::vector<double> eigenvalues;                // descending
    std::vector<Eigen::VectorXd> eigenvectors;      // of the Jacobian itself, unit length
    int morse_index = 0;                            // strictly positive eigenvalues
    double radial_eigen_defect = 0.0;               // |Dg r - (s+1) r| / |r|
    double symmetrization_defect = 0.0;
    Eigen::VectorXd unstable_direction;             // empty for a single sphere
};

/// Spectrum of a stationary-point Jacobian via the similarity
/// diag(r^{(n-1)/2}) Dg diag(r^{-(n-1)/2}), which is symmetric.
/// Throws NumericalError if the conjugated matrix is asymmetric beyond `symmetry_tol`.
StabilityReport spectrum(const Eigen::MatrixXd& jac, const std::vector<double>& radii,
                         const KernelParams& p, double symmetry_tol = 1e-6);

/// Convenience: jacobian + spectrum for a solution.
StabilityReport analyze_stability(const KernelParams& p, const ShrinkerSolution& sol,
                                  const QuadratureConfig& q = {});

/// (dg_m/dr_m at the outermost radius, s + 1). Needs at least two radii.
std::pair<double, double> corner_derivative_check(const KernelParams& p,
                                                  const ShrinkerSolution& sol,
                                                  const QuadratureConfig& q = {});

struct ShellMonotonicity {
    bool increasing = false;      // h(r) = K(r_max, r) strictly increasing on the grid
    double worst_margin = 0.0;    // min over the grid of h(r_{k+1}) - h(r_k)
    bool radii_ordered = false;   // r_i h(r_i) < r_j h(r_j) for i < j < m
};

ShellMonotonicity shell_monotonicity_check(const KernelParams& p, const ShrinkerSolution& sol,
                                           int grid_size, const QuadratureConfig& q = {});

}  // namespace fracshrink
