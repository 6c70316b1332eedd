#pragma once

#include <stdexcept>
#include <string>

namespace predfb {

/// Thrown when a certificate cannot be produced (non-Hurwitz closed loop,
/// indefinite weights, nonpositive decay rate).
class CertificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by the simulator when the state norm exceeds the divergence guard.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(double time, const std::string& msg)
        : std::runtime_error(msg), time_(time) {}

    double time() const { return time_; }

private:
    double time_;
};

}  // namespace predfb
