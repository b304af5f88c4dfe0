#pragma once

#include <stdexcept>
#include <string>

namespace kamlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A threshold comparison could not be decided at the working precision.
/// Raised instead of silently passing or failing.
struct PrecisionExhausted : Error {
    using Error::Error;
};

/// A continued-fraction schedule cannot be extended to the requested level,
/// neither exactly nor in log space.
struct ScheduleOverflow : Error {
    ScheduleOverflow(const std::string& msg, int last_valid)
        : Error(msg), last_valid_level(last_valid) {}
    int last_valid_level;
};

struct SolverFailure : Error {
    SolverFailure(const std::string& msg, double res) : Error(msg), best_residual(res) {}
    double best_residual;
};

}  // namespace kamlab
