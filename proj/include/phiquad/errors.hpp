#pragma once

#include <stdexcept>
#include <string>

namespace phiquad {

// Argument outside the effective domain of the function being queried.
struct DomainError : std::invalid_argument {
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Input collapses the problem (e.g. a constant sample where a spread is required).
struct DegenerateInput : std::invalid_argument {
    explicit DegenerateInput(const std::string& what) : std::invalid_argument(what) {}
};

// No finite minimizer found inside the (expanded) search brackets.
struct UnboundedError : std::runtime_error {
    explicit UnboundedError(const std::string& what) : std::runtime_error(what) {}
};

// No subgradient selection at conjugate kinks satisfies the envelope constraints.
struct KinkResolutionError : std::runtime_error {
    explicit KinkResolutionError(const std::string& what) : std::runtime_error(what) {}
};

// Operation requires a continuously differentiable conjugate.
struct NonsmoothSpecError : std::invalid_argument {
    explicit NonsmoothSpecError(const std::string& what) : std::invalid_argument(what) {}
};

// Operation requires a positively homogeneous conjugate.
struct HomogeneityError : std::invalid_argument {
    explicit HomogeneityError(const std::string& what) : std::invalid_argument(what) {}
};

// Iterative solver hit its cap before meeting the stationarity tolerance.
struct NonConvergence : std::runtime_error {
    NonConvergence(const std::string& what, int iterations, double final_step)
        : std::runtime_error(what), iterations(iterations), final_step(final_step) {}
    int iterations;
    double final_step;
};

} // namespace phiquad
