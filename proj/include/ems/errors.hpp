#pragma once

#include <stdexcept>
#include <string>

namespace ems {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Lyapunov operator is singular (some eigenvalue pair sums to zero).
class SingularEquation : public Error {
public:
    using Error::Error;
};

/// Stabilizability / detectability failure during gain synthesis.
class SynthesisError : public Error {
public:
    using Error::Error;
};

/// Weight or noise-intensity matrix violates its definiteness constraint.
class WeightError : public Error {
public:
    using Error::Error;
};

class SimulationDiverged : public Error {
public:
    SimulationDiverged(const std::string& what, double time)
        : Error(what + " (t = " + std::to_string(time) + " s)"), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace ems
