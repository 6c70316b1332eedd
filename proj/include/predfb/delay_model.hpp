#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "predfb/matrix_ops.hpp"

namespace predfb {

/// One discrete input channel: gain * u(t - delay).
struct DiscreteTap {
    Matrix gain;   // n x r
    double delay;  // seconds, >= 0
};

/// Distributed input term: integral of values(theta) * u(t + theta) over
/// [-span, 0]. The map must be piecewise continuous; jump locations are
/// declared so quadrature intervals never straddle them. At a declared
/// discontinuity the callable returns the right limit.
struct IntegralKernel {
    double span;  // h_int >= 0
    std::function<Matrix(double)> values;
    std::vector<double> discontinuities;  // within [-span, 0]
};

/// Linear time-invariant plant with mixed discrete and distributed input
/// delays,
///   xdot(t) = A x(t) + sum_i B_i u(t - h_i)
///             + integral_{-h_int}^{0} B_int(theta) u(t + theta) dtheta.
/// Immutable after construction; all operations on it are pure.
struct DelaySystem {
    int state_dim;
    int input_dim;
    Matrix a_matrix;
    std::vector<DiscreteTap> discrete_taps;
    std::optional<IntegralKernel> integral_kernel;
    double horizon;  // h >= every h_i and h_int

    DelaySystem(Matrix a, int input_dim, std::vector<DiscreteTap> taps,
                std::optional<IntegralKernel> kernel, double horizon);

    /// Largest delay actually present (taps and kernel span).
    double max_delay() const;
};

/// Copy of sys re-declared over a (not smaller) horizon.
DelaySystem with_horizon(const DelaySystem& sys, double horizon);

/// Predictor controller: estimated model plus static gain F (r x n).
/// F is taken as given; only its dimensions are validated here.
struct ControllerSpec {
    DelaySystem model;
    Matrix gain;

    ControllerSpec(DelaySystem model, Matrix gain);
};

/// Cumulative input measure beta(theta) =
///   sum_i B_i * chi(theta + h_i) + integral_{-h_int}^{max(theta,-h_int)} B_int.
/// chi(0) = 1, so beta is right-continuous with left limits and the atom at
/// -h_i is included for theta >= -h_i. The kernel part is integrated by
/// composite trapezoid split at the declared discontinuities.
Matrix beta_eval(const DelaySystem& sys, double theta, int kernel_points = 2001);

/// Left limit of the kernel at theta, taken just inside the piece to the
/// left (the callable itself returns right limits at declared jumps).
Matrix kernel_value_left(const IntegralKernel& kernel, double theta);

/// Smallest horizon valid for both systems: max over all their delays.
double shared_horizon(const DelaySystem& plant, const DelaySystem& model);

}  // namespace predfb
