#pragma once

#include <stdexcept>
#include <string>

namespace cellpol {

/// Explicit advection step violates max|u| < dx/dt.
class CflViolation : public std::runtime_error {
public:
    CflViolation(double max_speed, double bound)
        : std::runtime_error("CFL violation: max|u| = " + std::to_string(max_speed) +
                             " >= dx/dt = " + std::to_string(bound)),
          max_speed_(max_speed), bound_(bound) {}

    double max_speed() const { return max_speed_; }
    double bound() const { return bound_; }

private:
    double max_speed_;
    double bound_;
};

/// Explicit exchange step with dt*k_off > 1 (loses positivity of mu).
class PositivityStepViolation : public std::runtime_error {
public:
    explicit PositivityStepViolation(double dt_koff)
        : std::runtime_error("exchange step violates dt*k_off <= 1 (got " +
                             std::to_string(dt_koff) + ")"),
          dt_koff_(dt_koff) {}

    double dt_koff() const { return dt_koff_; }

private:
    double dt_koff_;
};

/// A stepper produced a non-finite value.
class NonFiniteState : public std::runtime_error {
public:
    explicit NonFiniteState(const std::string& where)
        : std::runtime_error("non-finite value produced by " + where) {}
};

/// Raised by configuration parsing and validation; carries the offending key and line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, int line, const std::string& what)
        : std::runtime_error(format(key, line, what)), key_(key), line_(line) {}

    const std::string& key() const { return key_; }
    int line() const { return line_; }

private:
    static std::string format(const std::string& key, int line, const std::string& what) {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!key.empty()) out += "key '" + key + "': ";
        return out + what;
    }

    std::string key_;
    int line_;
};

}  // namespace cellpol
