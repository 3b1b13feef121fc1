#pragma once

#include <stdexcept>
#include <string>

namespace polyfsi {

/// Process exit codes used by the CLI and by long-running drivers.
enum class ExitCode : int {
    ok = 0,
    inequality_violated = 1,
    config_error = 2,
    solver_diverged = 3,
    admissibility_termination = 4,
};

struct Error : std::runtime_error {
    ExitCode code;
    Error(ExitCode c, const std::string& what) : std::runtime_error(what), code(c) {}
};

/// Shell displacement left the admissible corridor (sup norm too close to L, or gamma too small).
struct AdmissibilityViolation : Error {
    explicit AdmissibilityViolation(const std::string& what)
        : Error(ExitCode::admissibility_termination, what) {}
};

/// A configuration vector left the closure of the spring domain B.
struct OutOfDomain : Error {
    explicit OutOfDomain(const std::string& what) : Error(ExitCode::config_error, what) {}
};

/// Adaptive quadrature failed to reach its tolerance.
struct QuadratureFailure : Error {
    explicit QuadratureFailure(const std::string& what) : Error(ExitCode::solver_diverged, what) {}
};

/// Discrete operator assembly produced a non-finite or structurally invalid matrix.
struct AssemblyFailure : Error {
    explicit AssemblyFailure(const std::string& what) : Error(ExitCode::solver_diverged, what) {}
};

/// A linear or nonlinear solve diverged or hit its iteration cap.
struct SolverDiverged : Error {
    explicit SolverDiverged(const std::string& what) : Error(ExitCode::solver_diverged, what) {}
};

/// The pressure/saddle solve failed (singular or non-finite factorization).
struct PoissonSolveFailure : Error {
    explicit PoissonSolveFailure(const std::string& what) : Error(ExitCode::solver_diverged, what) {}
};

/// A monitored energy/entropy inequality failed beyond its slack.
struct InequalityViolated : Error {
    explicit InequalityViolated(const std::string& what) : Error(ExitCode::inequality_violated, what) {}
};

/// The damped fixed-point iteration failed to converge even after window halving.
struct NoConvergence : Error {
    explicit NoConvergence(const std::string& what) : Error(ExitCode::solver_diverged, what) {}
};

/// Malformed or out-of-range run configuration.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ExitCode::config_error, what) {}
};

}  // namespace polyfsi
