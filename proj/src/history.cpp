#include "predfb/history.hpp"

#include <algorithm>
#include <stdexcept>

namespace predfb {

PiecewiseConstantHistory::PiecewiseConstantHistory(std::vector<double> knots,
                                                   std::vector<Vector> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.empty() || knots_.size() != values_.size()) {
        throw std::invalid_argument("piecewise history: knot/value count mismatch");
    }
    if (!std::is_sorted(knots_.begin(), knots_.end())) {
        throw std::invalid_argument("piecewise history: knots must be increasing");
    }
}

void PiecewiseConstantHistory::value(double theta, Vector& out) const {
    if (theta < knots_.front()) {
        throw std::domain_error("piecewise history: query below covered range");
    }
    auto it = std::upper_bound(knots_.begin(), knots_.end(), theta);
    out = values_[std::size_t(it - knots_.begin()) - 1];
}

void PiecewiseConstantHistory::value_left(double theta, Vector& out) const {
    if (theta < knots_.front()) {
        throw std::domain_error("piecewise history: query below covered range");
    }
    auto it = std::lower_bound(knots_.begin(), knots_.end(), theta);
    if (it != knots_.end() && *it == theta && it != knots_.begin()) {
        out = values_[std::size_t(it - knots_.begin()) - 1];
        return;
    }
    value(theta, out);
}

std::vector<double> PiecewiseConstantHistory::jump_locations() const {
    return std::vector<double>(knots_.begin() + 1, knots_.end());
}

}  // namespace predfb
