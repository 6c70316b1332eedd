#include "predfb/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace predfb {

namespace {

std::vector<double> system_splits(const DelaySystem& sys) {
    std::vector<double> splits;
    for (const auto& tap : sys.discrete_taps) splits.push_back(-tap.delay);
    if (sys.integral_kernel) {
        splits.push_back(-sys.integral_kernel->span);
        for (double d : sys.integral_kernel->discontinuities) splits.push_back(d);
    }
    return splits;
}

std::size_t nearest_index(const std::vector<double>& points, double value) {
    auto it = std::lower_bound(points.begin(), points.end(), value);
    if (it == points.end()) return points.size() - 1;
    if (it == points.begin()) return 0;
    const std::size_t hi = std::size_t(it - points.begin());
    return (value - points[hi - 1] <= points[hi] - value) ? hi - 1 : hi;
}

}  // namespace

QuadratureGrid make_system_grid(const DelaySystem& sys, int num_points) {
    return make_quadrature_grid(sys.horizon, num_points, system_splits(sys));
}

QuadratureGrid make_shared_grid(const DelaySystem& plant, const DelaySystem& model,
                                int num_points) {
    if (std::abs(plant.horizon - model.horizon) >
        1e-12 * std::max(plant.horizon, 1.0)) {
        throw std::invalid_argument(
            "shared grid: plant and model must declare the same horizon");
    }
    std::vector<double> splits = system_splits(plant);
    const std::vector<double> more = system_splits(model);
    splits.insert(splits.end(), more.begin(), more.end());
    return make_quadrature_grid(plant.horizon, num_points, std::move(splits));
}

KernelGrid compute_kernel(const DelaySystem& sys, const QuadratureGrid& grid) {
    const double h = sys.horizon;
    if (std::abs(grid.horizon() - h) > 1e-12 * std::max(h, 1.0) ||
        std::abs(grid.points.back()) > 1e-12) {
        throw std::invalid_argument("compute_kernel: grid must span [-h, 0]");
    }
    const double tol = 1e-9 * std::max(h, 1.0);

    const std::size_t count = grid.size();
    const int n = sys.state_dim;
    const int r = sys.input_dim;

    // atoms sorted by location; each must sit exactly on a grid point
    struct Atom {
        double location;
        Matrix propagated;  // e^{-A h_i} B_i
    };
    std::vector<Atom> atoms;
    atoms.reserve(sys.discrete_taps.size());
    for (const auto& tap : sys.discrete_taps) {
        const double loc = -tap.delay;
        if (std::abs(grid.points[nearest_index(grid.points, loc)] - loc) > tol) {
            throw std::invalid_argument(
                "compute_kernel: atom location is not a grid point");
        }
        atoms.push_back({loc, expm(-tap.delay * sys.a_matrix) * tap.gain});
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });

    // cumulative trapezoid of e^{A tau} B_int(tau), side-aware at jumps
    std::vector<Matrix> kernel_part(count, Matrix::Zero(n, r));
    if (sys.integral_kernel && sys.integral_kernel->span > 0.0) {
        const auto& kernel = *sys.integral_kernel;
        const double lo = -kernel.span;
        const std::size_t start = nearest_index(grid.points, lo);
        if (std::abs(grid.points[start] - lo) > tol) {
            throw std::invalid_argument(
                "compute_kernel: kernel span edge is not a grid point");
        }
        auto is_jump = [&kernel, tol](double tau) {
            for (double d : kernel.discontinuities) {
                if (std::abs(d - tau) <= tol) return true;
            }
            return false;
        };
        Matrix acc = Matrix::Zero(n, r);
        Matrix g_prev = expm(grid.points[start] * sys.a_matrix) *
                        kernel.values(grid.points[start]);
        for (std::size_t j = start + 1; j < count; ++j) {
            const double tau = grid.points[j];
            const Matrix propagator = expm(tau * sys.a_matrix);
            const Matrix g_left =
                propagator * (is_jump(tau) ? kernel_value_left(kernel, tau)
                                           : kernel.values(tau));
            acc += 0.5 * (tau - grid.points[j - 1]) * (g_prev + g_left);
            kernel_part[j] = acc;
            g_prev = propagator * kernel.values(tau);
        }
    }

    KernelGrid out;
    out.grid = grid;
    out.samples.resize(count);
    out.left_samples.resize(count);
    for (const auto& atom : atoms) out.atom_locations.push_back(atom.location);

    Matrix atom_sum = Matrix::Zero(n, r);
    std::size_t next_atom = 0;
    for (std::size_t j = 0; j < count; ++j) {
        const double theta = grid.points[j];
        Matrix atom_sum_left = atom_sum;
        while (next_atom < atoms.size() && atoms[next_atom].location <= theta + tol) {
            atom_sum += atoms[next_atom].propagated;
            if (atoms[next_atom].location < theta - tol) {
                atom_sum_left += atoms[next_atom].propagated;
            }
            ++next_atom;
        }
        const Matrix back_prop = expm(-theta * sys.a_matrix);
        out.samples[j] = back_prop * (atom_sum + kernel_part[j]);
        out.left_samples[j] = back_prop * (atom_sum_left + kernel_part[j]);
    }
    return out;
}

Matrix q_at_zero(const KernelGrid& kernel) {
    if (kernel.samples.empty()) {
        throw std::invalid_argument("q_at_zero: kernel has no samples");
    }
    return kernel.samples.back();
}

Matrix gram_matrix(const KernelGrid& kernel) {
    const std::size_t count = kernel.grid.size();
    const int n = kernel.rows();
    Matrix g = Matrix::Zero(n, n);
    for (std::size_t j = 0; j + 1 < count; ++j) {
        const double half = 0.5 * (kernel.grid.points[j + 1] - kernel.grid.points[j]);
        g += half * (kernel.samples[j] * kernel.samples[j].transpose() +
                     kernel.left_samples[j + 1] *
                         kernel.left_samples[j + 1].transpose());
    }
    return 0.5 * (g + g.transpose());
}

double delta_kernel_norm(const KernelGrid& q, const KernelGrid& q_hat) {
    if (q.grid.points != q_hat.grid.points) {
        throw std::invalid_argument("delta_kernel_norm: kernels use different grids");
    }
    if (q.rows() != q_hat.rows() || q.cols() != q_hat.cols()) {
        throw std::invalid_argument("delta_kernel_norm: kernel shape mismatch");
    }
    const std::size_t count = q.grid.size();
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < count; ++j) {
        const double half = 0.5 * (q.grid.points[j + 1] - q.grid.points[j]);
        const double right = spectral_norm(q_hat.samples[j] - q.samples[j]);
        const double left =
            spectral_norm(q_hat.left_samples[j + 1] - q.left_samples[j + 1]);
        acc += half * (right * right + left * left);
    }
    return std::sqrt(acc);
}

Vector reduce_state(const Vector& x, const InputHistory& u_hist,
                    const KernelGrid& kernel) {
    if (x.size() != kernel.rows()) {
        throw std::invalid_argument("reduce_state: state dimension mismatch");
    }
    const auto samples = detail::sample_history(u_hist, kernel.grid);
    return x + detail::integrate_kernel_history(kernel, samples);
}

double single_delay_delta_bound(const Matrix& a, const Matrix& b, double delta,
                                double delta_hat, NormKind norm) {
    if (delta < 0.0 || delta_hat < 0.0) {
        throw std::domain_error("single_delay_delta_bound: delays must be nonnegative");
    }
    if (a.rows() != a.cols() || b.rows() != a.rows()) {
        throw std::invalid_argument("single_delay_delta_bound: dimension mismatch");
    }
    const double d = std::abs(delta_hat - delta);
    const double h = std::max(delta, delta_hat);
    const double na = matrix_norm(a, norm);
    const double nb2 = std::pow(matrix_norm(b, norm), 2);
    if (na == 0.0) {
        return nb2 * d;
    }
    const double scale = nb2 / (2.0 * na);
    const double grow = std::exp(na * d) - 1.0;
    return scale * (std::exp(2.0 * na * d) - 1.0) +
           scale * (std::exp(2.0 * na * h) - 1.0) * grow * grow;
}

namespace detail {

HistorySamples sample_history(const InputHistory& hist, const QuadratureGrid& grid) {
    const std::size_t count = grid.size();
    HistorySamples out;

    Vector probe;
    hist.value(grid.points.back(), probe);
    const Eigen::Index r = probe.size();
    out.right.resize(r, Eigen::Index(count));
    out.left.resize(r, Eigen::Index(count));

    Vector scratch(r);
    for (std::size_t j = 0; j < count; ++j) {
        hist.value(grid.points[j], scratch);
        out.right.col(Eigen::Index(j)) = scratch;
        out.left.col(Eigen::Index(j)) = scratch;
    }

    const double h = grid.horizon();
    for (double jump : hist.jump_locations()) {
        if (jump < -h || jump > 0.0) continue;
        const std::size_t idx = nearest_index(grid.points, jump);
        const double cell =
            (idx + 1 < count ? grid.points[idx + 1] : grid.points[idx]) -
            (idx > 0 ? grid.points[idx - 1] : grid.points[idx]);
        if (std::abs(grid.points[idx] - jump) <= 1e-6 * std::max(cell, 1e-300)) {
            hist.value_left(jump, scratch);
            out.left.col(Eigen::Index(idx)) = scratch;
            hist.value(jump, scratch);
            out.right.col(Eigen::Index(idx)) = scratch;
        } else {
            HistorySamples::Jump j;
            j.theta = jump;
            auto it = std::upper_bound(grid.points.begin(), grid.points.end(), jump);
            j.cell = std::size_t(it - grid.points.begin()) - 1;
            hist.value_left(jump, j.left_value);
            hist.value(jump, j.right_value);
            out.interior_jumps.push_back(std::move(j));
        }
    }
    std::sort(out.interior_jumps.begin(), out.interior_jumps.end(),
              [](const auto& a, const auto& b) { return a.theta < b.theta; });
    return out;
}

Vector integrate_kernel_history(const KernelGrid& kernel,
                                const HistorySamples& hist) {
    const auto& pts = kernel.grid.points;
    const std::size_t count = pts.size();
    Vector acc = Vector::Zero(kernel.rows());

    std::size_t jump_idx = 0;
    for (std::size_t c = 0; c + 1 < count; ++c) {
        const double lo = pts[c];
        const double hi = pts[c + 1];
        const double width = hi - lo;

        bool split = false;
        while (jump_idx < hist.interior_jumps.size() &&
               hist.interior_jumps[jump_idx].cell == c) {
            // split the cell at the jump; kernel interpolates linearly inside
            const auto& jump = hist.interior_jumps[jump_idx];
            const double frac = (jump.theta - lo) / width;
            const Matrix k_mid = kernel.samples[c] +
                                 frac * (kernel.left_samples[c + 1] - kernel.samples[c]);
            if (!split) {
                acc.noalias() += 0.5 * (jump.theta - lo) *
                                 (kernel.samples[c] * hist.right.col(Eigen::Index(c)) +
                                  k_mid * jump.left_value);
            } else {
                const auto& prev = hist.interior_jumps[jump_idx - 1];
                const double pfrac = (prev.theta - lo) / width;
                const Matrix k_prev =
                    kernel.samples[c] +
                    pfrac * (kernel.left_samples[c + 1] - kernel.samples[c]);
                acc.noalias() += 0.5 * (jump.theta - prev.theta) *
                                 (k_prev * prev.right_value + k_mid * jump.left_value);
            }
            split = true;
            ++jump_idx;
        }
        if (!split) {
            acc.noalias() +=
                0.5 * width *
                (kernel.samples[c] * hist.right.col(Eigen::Index(c)) +
                 kernel.left_samples[c + 1] * hist.left.col(Eigen::Index(c + 1)));
        } else {
            const auto& last = hist.interior_jumps[jump_idx - 1];
            const double lfrac = (last.theta - lo) / width;
            const Matrix k_last =
                kernel.samples[c] +
                lfrac * (kernel.left_samples[c + 1] - kernel.samples[c]);
            acc.noalias() +=
                0.5 * (hi - last.theta) *
                (k_last * last.right_value +
                 kernel.left_samples[c + 1] * hist.left.col(Eigen::Index(c + 1)));
        }
    }
    return acc;
}

double integrate_weighted_l2(const QuadratureGrid& grid, const HistorySamples& hist,
                             const Matrix& weight, double sigma) {
    const auto& pts = grid.points;
    const std::size_t count = pts.size();
    auto quad = [&weight](const Vector& u) { return u.dot(weight * u); };

    double acc = 0.0;
    std::size_t jump_idx = 0;
    for (std::size_t c = 0; c + 1 < count; ++c) {
        const double lo = pts[c];
        const double hi = pts[c + 1];
        const double w_lo = std::exp(sigma * lo);
        const double w_hi = std::exp(sigma * hi);

        bool split = false;
        while (jump_idx < hist.interior_jumps.size() &&
               hist.interior_jumps[jump_idx].cell == c) {
            const auto& jump = hist.interior_jumps[jump_idx];
            const double w_mid = std::exp(sigma * jump.theta);
            if (!split) {
                acc += 0.5 * (jump.theta - lo) *
                       (w_lo * quad(hist.right.col(Eigen::Index(c))) +
                        w_mid * quad(jump.left_value));
            } else {
                const auto& prev = hist.interior_jumps[jump_idx - 1];
                acc += 0.5 * (jump.theta - prev.theta) *
                       (std::exp(sigma * prev.theta) * quad(prev.right_value) +
                        w_mid * quad(jump.left_value));
            }
            split = true;
            ++jump_idx;
        }
        if (!split) {
            acc += 0.5 * (hi - lo) *
                   (w_lo * quad(hist.right.col(Eigen::Index(c))) +
                    w_hi * quad(hist.left.col(Eigen::Index(c + 1))));
        } else {
            const auto& last = hist.interior_jumps[jump_idx - 1];
            acc += 0.5 * (hi - last.theta) *
                   (std::exp(sigma * last.theta) * quad(last.right_value) +
                    w_hi * quad(hist.left.col(Eigen::Index(c + 1))));
        }
    }
    return acc;
}

}  // namespace detail

}  // namespace predfb
