#pragma once

#include <functional>
#include <vector>

#include "predfb/matrix_ops.hpp"

namespace predfb {

/// Input history u(t + theta) on [-h, 0], accessed by theta. Values are
/// right limits; value_left differs only at declared jump locations.
class InputHistory {
public:
    virtual ~InputHistory() = default;

    virtual void value(double theta, Vector& out) const = 0;
    virtual void value_left(double theta, Vector& out) const { value(theta, out); }

    /// Interior discontinuities of the history (theta locations).
    virtual std::vector<double> jump_locations() const { return {}; }
};

/// Continuous history backed by a callable.
class FunctionHistory : public InputHistory {
public:
    explicit FunctionHistory(std::function<Vector(double)> fn) : fn_(std::move(fn)) {}

    void value(double theta, Vector& out) const override { out = fn_(theta); }

private:
    std::function<Vector(double)> fn_;
};

/// History that is constant on [knots[i], knots[i+1]) with the last value
/// extending to theta = 0. Queries below knots.front() are a domain error.
class PiecewiseConstantHistory : public InputHistory {
public:
    PiecewiseConstantHistory(std::vector<double> knots, std::vector<Vector> values);

    void value(double theta, Vector& out) const override;
    void value_left(double theta, Vector& out) const override;
    std::vector<double> jump_locations() const override;

private:
    std::vector<double> knots_;
    std::vector<Vector> values_;
};

/// History identically equal to a fixed vector.
class ConstantHistory : public InputHistory {
public:
    explicit ConstantHistory(Vector value) : value_(std::move(value)) {}

    void value(double, Vector& out) const override { out = value_; }

private:
    Vector value_;
};

/// History identically zero with the given input dimension.
class ZeroHistory : public InputHistory {
public:
    explicit ZeroHistory(int input_dim) : input_dim_(input_dim) {}

    void value(double, Vector& out) const override {
        out.setZero(input_dim_);
    }

private:
    int input_dim_;
};

}  // namespace predfb
