#include "predfb/matrix_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace predfb {

double matrix_norm(const Matrix& m, NormKind kind) {
    return kind == NormKind::Spectral ? spectral_norm(m) : m.norm();
}

Matrix expm(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("expm: matrix must be square");
    }
    if (!m.allFinite()) {
        throw std::invalid_argument("expm: matrix has non-finite entries");
    }
    return m.exp();
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double spectral_abscissa(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("spectral_abscissa: matrix must be square");
    }
    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
    return solver.eigenvalues().real().maxCoeff();
}

std::pair<double, double> sym_eig_extremes(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("sym_eig_extremes: matrix must be square");
    }
    const double scale = std::max(1.0, m.norm());
    if ((m - m.transpose()).norm() > 1e-12 * scale) {
        throw std::domain_error("sym_eig_extremes: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("sym_eig_extremes: eigensolver failed");
    }
    const auto& ev = solver.eigenvalues();
    return {ev(0), ev(ev.size() - 1)};
}

Matrix solve_lyapunov(const Matrix& a_cl, const Matrix& w) {
    const Eigen::Index n = a_cl.rows();
    if (a_cl.cols() != n || w.rows() != n || w.cols() != n) {
        throw std::invalid_argument("solve_lyapunov: dimension mismatch");
    }

    // vec(A^T V + V A) = (I (x) A^T + A^T (x) I) vec(V)
    Matrix k = Matrix::Zero(n * n, n * n);
    const Matrix at = a_cl.transpose();
    for (Eigen::Index j = 0; j < n; ++j) {
        k.block(j * n, j * n, n, n) += at;  // I (x) A^T
    }
    for (Eigen::Index bi = 0; bi < n; ++bi) {
        for (Eigen::Index bj = 0; bj < n; ++bj) {
            // (A^T (x) I) block (bi, bj) = at(bi, bj) * I
            for (Eigen::Index d = 0; d < n; ++d) {
                k(bi * n + d, bj * n + d) += at(bi, bj);
            }
        }
    }

    Eigen::VectorXd rhs(n * n);
    for (Eigen::Index col = 0; col < n; ++col) {
        rhs.segment(col * n, n) = -w.col(col);
    }

    Eigen::FullPivLU<Matrix> lu(k);
    if (!lu.isInvertible()) {
        throw std::runtime_error("solve_lyapunov: singular Kronecker system");
    }
    Eigen::VectorXd vvec = lu.solve(rhs);

    Matrix v(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        v.col(col) = vvec.segment(col * n, n);
    }
    return 0.5 * (v + v.transpose());
}

namespace {

// Merges split locations into a uniform grid, snapping a split onto a nearby
// uniform node instead of creating a sliver cell.
std::vector<double> build_points(double h, int num_points,
                                 std::vector<double> splits) {
    const int n = std::max(num_points, 2);
    std::vector<double> pts(n);
    const double step = h / double(n - 1);
    for (int j = 0; j < n; ++j) {
        pts[j] = -h + double(j) * step;
    }
    pts.front() = -h;
    pts.back() = 0.0;

    std::sort(splits.begin(), splits.end());
    for (double s : splits) {
        if (s < -h - 1e-12 * std::max(h, 1.0) || s > 1e-12 * std::max(h, 1.0)) {
            throw std::invalid_argument("quadrature grid: split point outside [-h, 0]");
        }
        s = std::clamp(s, -h, 0.0);
        auto it = std::lower_bound(pts.begin(), pts.end(), s);
        if (it != pts.end() && *it == s) continue;
        double lo = (it == pts.begin()) ? -h : *(it - 1);
        double hi = (it == pts.end()) ? 0.0 : *it;
        if (it != pts.begin() && s - lo < 0.25 * step && lo != -h) {
            *(it - 1) = s;
        } else if (it != pts.end() && hi - s < 0.25 * step && hi != 0.0) {
            *it = s;
        } else {
            pts.insert(it, s);
        }
    }
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace

QuadratureGrid make_quadrature_grid(double h, int num_points,
                                    std::vector<double> splits) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("quadrature grid: horizon must be positive");
    }
    QuadratureGrid grid;
    grid.points = build_points(h, num_points, splits);

    const std::size_t n = grid.points.size();
    grid.weights.assign(n, 0.0);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double half = 0.5 * (grid.points[j + 1] - grid.points[j]);
        grid.weights[j] += half;
        grid.weights[j + 1] += half;
    }

    std::sort(splits.begin(), splits.end());
    splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
    for (double s : splits) {
        const double snapped = *std::min_element(
            grid.points.begin(), grid.points.end(),
            [s](double a, double b) { return std::abs(a - s) < std::abs(b - s); });
        grid.split_points.push_back(snapped);
    }
    std::sort(grid.split_points.begin(), grid.split_points.end());
    grid.split_points.erase(
        std::unique(grid.split_points.begin(), grid.split_points.end()),
        grid.split_points.end());
    return grid;
}

double trapezoid_integrate(const QuadratureGrid& grid,
                           const std::vector<double>& samples) {
    if (samples.size() != grid.points.size()) {
        throw std::invalid_argument("trapezoid_integrate: sample count mismatch");
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        acc += grid.weights[j] * samples[j];
    }
    return acc;
}

Matrix trapezoid_integrate(const QuadratureGrid& grid,
                           const std::vector<Matrix>& samples) {
    if (samples.size() != grid.points.size()) {
        throw std::invalid_argument("trapezoid_integrate: sample count mismatch");
    }
    Matrix acc = Matrix::Zero(samples.front().rows(), samples.front().cols());
    for (std::size_t j = 0; j < samples.size(); ++j) {
        if (samples[j].rows() != acc.rows() || samples[j].cols() != acc.cols()) {
            throw std::invalid_argument("trapezoid_integrate: sample shape mismatch");
        }
        acc += grid.weights[j] * samples[j];
    }
    return acc;
}

}  // namespace predfb
