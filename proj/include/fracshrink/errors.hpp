#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fracshrink {

/// Invalid argument or parameter outside the admissible domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Base for failures of a numerical procedure on valid input.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Quadrature could not reach the requested accuracy.
class ToleranceNotMet : public NumericalError {
public:
    ToleranceNotMet(const std::string& what, double achieved, double requested)
        : NumericalError(what + " (achieved error " + std::to_string(achieved) +
                         ", requested " + std::to_string(requested) + ")"),
          achieved_(achieved), requested_(requested) {}

    double achieved() const noexcept { return achieved_; }
    double requested() const noexcept { return requested_; }

private:
    double achieved_;
    double requested_;
};

/// Two boundary radii are too close for a trustworthy curvature evaluation.
class DegenerateConfiguration : public NumericalError {
public:
    DegenerateConfiguration(const std::string& what, std::size_t lower_index)
        : NumericalError(what), lower_index_(lower_index) {}

    /// Index of the lower radius of the offending adjacent pair.
    std::size_t lower_index() const noexcept { return lower_index_; }

private:
    std::size_t lower_index_;
};

/// Iterative solver exhausted its budget. Carries the best iterate found.
class ConvergenceFailure : public NumericalError {
public:
    ConvergenceFailure(const std::string& what, std::vector<double> best, double residual)
        : NumericalError(what), best_(std::move(best)), residual_(residual) {}

    const std::vector<double>& best_iterate() const noexcept { return best_; }
    double residual() const noexcept { return residual_; }

private:
    std::vector<double> best_;
    double residual_;
};

}  // namespace fracshrink
