#pragma once

#include <vector>

#include "predfb/delay_model.hpp"
#include "predfb/history.hpp"
#include "predfb/matrix_ops.hpp"

namespace predfb {

/// Artstein reduction kernel Q(theta) sampled on a quadrature grid.
///
/// Q(theta) accumulates the input measure propagated through the plant
/// matrix; it jumps by B_i at theta = -h_i. `samples` holds the
/// right-continuous values (the atom at -h_i included), `left_samples` the
/// left limits; the two differ only at atom locations. Between atoms and
/// kernel discontinuities Q satisfies dQ/dtheta = -A Q(theta) + B_int(theta).
struct KernelGrid {
    QuadratureGrid grid;
    std::vector<Matrix> samples;
    std::vector<Matrix> left_samples;
    std::vector<double> atom_locations;

    int rows() const { return samples.empty() ? 0 : int(samples.front().rows()); }
    int cols() const { return samples.empty() ? 0 : int(samples.front().cols()); }
};

/// Grid on [-h, 0] splitting at every atom, kernel span edge and kernel
/// discontinuity of both systems. Both systems must declare the same horizon.
QuadratureGrid make_shared_grid(const DelaySystem& plant, const DelaySystem& model,
                                int num_points);

/// Grid suited to a single system (same splits, own horizon).
QuadratureGrid make_system_grid(const DelaySystem& sys, int num_points);

/// Samples Q(theta) = integral_{-h}^{theta} e^{A(tau-theta)} dbeta(tau) on the
/// grid. Atom contributions are evaluated in closed form; only the
/// distributed part is integrated by trapezoid. Every atom location and
/// kernel discontinuity must be a grid point.
KernelGrid compute_kernel(const DelaySystem& sys, const QuadratureGrid& grid);

/// The sample at theta = 0 (atoms with zero delay included).
Matrix q_at_zero(const KernelGrid& kernel);

/// Reduced state y = x + integral Q(theta) u(t + theta) dtheta.
Vector reduce_state(const Vector& x, const InputHistory& u_hist,
                    const KernelGrid& kernel);

/// G = integral Q(theta) Q(theta)^T dtheta over [-h, 0]; symmetric PSD.
Matrix gram_matrix(const KernelGrid& kernel);

/// L2 mismatch norm ||DeltaQ|| = sqrt(integral ||Qhat - Q||_2^2 dtheta).
/// Both kernels must live on the same grid, which must split at the atoms
/// of both. The pointwise norm is always spectral.
double delta_kernel_norm(const KernelGrid& q, const KernelGrid& q_hat);

/// Closed-form upper bound on ||DeltaQ||^2 for a single-tap system with true
/// delay delta and modeled delay delta_hat:
///   ||B||^2/(2||A||) * (e^{2||A|| d} - 1)
///     + ||B||^2/(2||A||) * (e^{2||A|| h} - 1)(e^{||A|| d} - 1)^2,
/// d = |delta_hat - delta|, h = max(delta, delta_hat); reduces to
/// ||B||^2 * d when ||A|| = 0.
double single_delay_delta_bound(const Matrix& a, const Matrix& b, double delta,
                                double delta_hat,
                                NormKind norm = NormKind::Spectral);

namespace detail {

/// History sampled onto a grid: per-node right/left values plus any jumps
/// that fall strictly inside a cell.
struct HistorySamples {
    Eigen::MatrixXd right;  // r x N
    Eigen::MatrixXd left;   // r x N
    struct Jump {
        std::size_t cell;  // jump lies in (points[cell], points[cell+1])
        double theta;
        Vector left_value;
        Vector right_value;
    };
    std::vector<Jump> interior_jumps;
};

HistorySamples sample_history(const InputHistory& hist, const QuadratureGrid& grid);

/// integral K(theta) u(theta) dtheta with side-aware trapezoid: each cell
/// uses the right value at its left endpoint and the left value at its right
/// endpoint; cells containing a history jump are split at the jump.
Vector integrate_kernel_history(const KernelGrid& kernel,
                                const HistorySamples& hist);

/// integral e^{sigma*theta} u(theta)^T W u(theta) dtheta with the same
/// side-aware trapezoid. Pass sigma = 0 and W = I for the plain L2 norm.
double integrate_weighted_l2(const QuadratureGrid& grid, const HistorySamples& hist,
                             const Matrix& weight, double sigma);

}  // namespace detail

}  // namespace predfb
