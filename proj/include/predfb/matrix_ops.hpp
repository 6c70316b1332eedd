#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace predfb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Matrix norm used by the certificate constants. Spectral (largest singular
/// value) is the default; Frobenius is a more conservative alternative and
/// keeps every bound valid because it dominates the spectral norm.
enum class NormKind { Spectral, Frobenius };

double matrix_norm(const Matrix& m, NormKind kind);

/// Matrix exponential (scaling-and-squaring with a Pade approximant).
Matrix expm(const Matrix& m);

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Max real part of the eigenvalues; Hurwitz iff negative.
double spectral_abscissa(const Matrix& m);

/// Extreme eigenvalues (min, max) of a symmetric matrix. Rejects input whose
/// asymmetry exceeds 1e-12 * ||m||.
std::pair<double, double> sym_eig_extremes(const Matrix& m);

/// Solves a_cl^T V + V a_cl = -w for symmetric positive definite w and
/// Hurwitz a_cl, by Kronecker vectorization of the n^2 x n^2 linear system.
/// The result is symmetrized.
Matrix solve_lyapunov(const Matrix& a_cl, const Matrix& w);

/// Composite-trapezoid grid on [-h, 0]. Every split point is a grid point,
/// so no quadrature interval straddles a declared discontinuity.
struct QuadratureGrid {
    std::vector<double> points;        // strictly increasing, first=-h, last=0
    std::vector<double> weights;       // composite trapezoid weights
    std::vector<double> split_points;  // subset of points

    std::size_t size() const { return points.size(); }
    double horizon() const { return -points.front(); }
};

/// Builds a grid of roughly num_points nodes on [-h, 0] with the given split
/// locations inserted (or snapped onto nearby uniform nodes).
QuadratureGrid make_quadrature_grid(double h, int num_points,
                                    std::vector<double> splits = {});

double trapezoid_integrate(const QuadratureGrid& grid,
                           const std::vector<double>& samples);
Matrix trapezoid_integrate(const QuadratureGrid& grid,
                           const std::vector<Matrix>& samples);

}  // namespace predfb
