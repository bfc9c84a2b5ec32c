#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace prandtl {

// Every failure the library reports derives from Error and carries a kind,
// which the C API maps onto its status codes.
enum class ErrorKind {
    config,
    data,
    domain,
    usage,
    degeneracy,
    step,
    blow_up,
    life_span_exceeded,
    iteration_divergence,
    numerical_overflow,
    io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class NumericalOverflow : public Error {
public:
    explicit NumericalOverflow(const std::string& what)
        : Error(ErrorKind::numerical_overflow, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Division by a vanishing vorticity (or, in the steady march, by a
/// vanishing ρ(u+θ)²). Carries the offending minimum.
class DegeneracyError : public Error {
public:
    DegeneracyError(const std::string& what, double minimum)
        : Error(ErrorKind::degeneracy, what), minimum_(minimum) {}
    double minimum() const noexcept { return minimum_; }

private:
    double minimum_;
};

/// A time step that cannot be taken as requested, e.g. an advective CFL
/// violation. suggested_dt is 0 when no suggestion applies; at is the time
/// or station of the attempted step (NaN when unknown).
class StepError : public Error {
public:
    StepError(const std::string& what, double suggested_dt, double at = std::numeric_limits<double>::quiet_NaN())
        : Error(ErrorKind::step, what), suggested_dt_(suggested_dt), at_(at) {}
    double suggested_dt() const noexcept { return suggested_dt_; }
    double at() const noexcept { return at_; }

private:
    double suggested_dt_;
    double at_;
};

class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, double time)
        : Error(ErrorKind::blow_up, what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// The steady march left the region where the uniform estimates apply
/// (wall slope fell below λ₀). station is the x at which it happened.
class LifeSpanExceeded : public Error {
public:
    LifeSpanExceeded(const std::string& what, double station)
        : Error(ErrorKind::life_span_exceeded, what), station_(station) {}
    double station() const noexcept { return station_; }

private:
    double station_;
};

class IterationDivergence : public Error {
public:
    IterationDivergence(const std::string& what, int iteration)
        : Error(ErrorKind::iteration_divergence, what), iteration_(iteration) {}
    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

}  // namespace prandtl
