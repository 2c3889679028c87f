#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace epsext {

// Base for all library errors. Each subclass names the failed contract or
// assumption so the CLI can map it to an exit code.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Gram-Schmidt input frame is (nearly) linearly dependent.
struct DegenerateFrame : Error {
    using Error::Error;
};

// Simplex/point-set dimension exceeds the ambient dimension.
struct DimensionError : Error {
    using Error::Error;
};

// Point set or ball union collapses below measurable size.
struct DegenerateSet : Error {
    using Error::Error;
};

// Query point outside the admissible range of an operation.
struct OutOfRange : Error {
    using Error::Error;
};

// The ball union cannot witness the interior-ball assumption at a point.
struct NoWitness : Error {
    std::vector<double> point;
    NoWitness(const std::string& msg, std::vector<double> p)
        : Error(msg), point(std::move(p)) {}
};

// Malformed or self-inconsistent configuration.
struct InvalidConfig : Error {
    using Error::Error;
};

// A work cap (cube count, tuple count) was exceeded fatally.
struct BudgetExceeded : Error {
    using Error::Error;
};

// Measured distortion of the source map exceeds the configured budget.
struct DistortionBudgetExceeded : Error {
    double measured = 0.0;
    double budget = 0.0;
    DistortionBudgetExceeded(const std::string& msg, double m, double b)
        : Error(msg), measured(m), budget(b) {}
};

// Newton inversion failed to converge; carries the residual trace.
struct NoConvergence : Error {
    std::vector<double> residual_trace;
    NoConvergence(const std::string& msg, std::vector<double> trace)
        : Error(msg), residual_trace(std::move(trace)) {}
};

}  // namespace epsext
