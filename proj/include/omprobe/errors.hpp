// errors.hpp — exception types for the solver modules

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace omprobe {

/// Fixed-point / iterative solver did not reach tolerance within its cap.
struct NonConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// More than one stable steady-state root; caller has to select.
struct MultistableError : std::runtime_error {
    std::vector<double> roots;         // all real detuning roots
    std::vector<bool> stable;          // stability flag per root
    MultistableError(std::string msg, std::vector<double> r, std::vector<bool> s)
        : std::runtime_error(std::move(msg)), roots(std::move(r)), stable(std::move(s)) {}
};

/// 2x2 response system is numerically singular.
struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested Fock truncation exceeds the configured dimension cap.
struct DimensionCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Liouvillian steady-state solve failed beyond the trace null direction.
struct SolverFailureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Adaptive integrator could not make progress (step rejection cascade).
struct StepFailureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Trajectory left the finite domain (e.g. parametric instability).
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sideband fit window shorter than one drive period.
struct IllConditionedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// CLI / config-file problem (maps to exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace omprobe
