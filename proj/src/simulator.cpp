#include "predfb/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace predfb {

namespace {

constexpr double kDivergenceGuard = 1e12;

/// Input samples at fixed step resolution, newest last. Sample m lives at
/// time m*dt; negative indices hold the initial history. The discontinuity
/// between u_init(0-) and the first computed input is kept exactly.
class HistoryBuffer {
public:
    HistoryBuffer(int input_dim, double dt, double horizon,
                  const std::function<Vector(double)>& u_init)
        : dt_(dt), input_dim_(input_dim) {
        min_index_ = -(long(std::ceil(horizon / dt)) + 2);
        capacity_ = std::size_t(-min_index_) + 3;
        data_.assign(capacity_, Vector::Zero(input_dim));
        for (long m = min_index_; m <= -1; ++m) {
            const double theta = std::max(double(m) * dt_, -horizon);
            slot(m) = u_init ? u_init(theta) : Vector::Zero(input_dim);
        }
        const double left_theta = std::max(-1e-12 * std::max(horizon, 1.0), -horizon);
        u0_left_ = u_init ? u_init(left_theta) : Vector::Zero(input_dim);
    }

    void push(long index, const Vector& u) {
        slot(index) = u;
        last_ = index;
        if (last_ == 0) {
            jump_at_zero_ = (u - u0_left_).norm() > 0.0;
        }
        min_index_ = std::max(min_index_, last_ - long(capacity_) + 1);
    }

    bool jump_at_zero() const { return jump_at_zero_; }
    const Vector& left_limit_at_zero() const { return u0_left_; }
    int input_dim() const { return input_dim_; }

    void lookup(double s, Vector& out) const {
        // queries within rounding noise of the start-time jump resolve to it
        if (std::abs(s) <= 1e-7 * dt_) s = 0.0;
        if (s <= double(min_index_) * dt_) {
            out = slot(min_index_);
            return;
        }
        if (last_ >= 0) {
            if (s >= double(last_) * dt_) {
                out = slot(last_);
                return;
            }
        } else if (s >= 0.0) {
            out = u0_left_;
            return;
        }
        long m = long(std::floor(s / dt_));
        m = std::clamp(m, min_index_, (last_ >= 0 ? last_ : 0L) - 1);
        const double alpha = s / dt_ - double(m);
        if (m == -1) {
            // the cell just below zero ends at the initial-history limit
            out = (1.0 - alpha) * slot(-1) + alpha * u0_left_;
        } else {
            out = (1.0 - alpha) * slot(m) + alpha * slot(m + 1);
        }
    }

    void lookup_left(double s, Vector& out) const {
        if (std::abs(s) <= 1e-7 * dt_) {
            out = u0_left_;
            return;
        }
        lookup(s, out);
    }

private:
    Vector& slot(long index) {
        return data_[std::size_t(((index % long(capacity_)) + long(capacity_)) %
                                 long(capacity_))];
    }
    const Vector& slot(long index) const {
        return data_[std::size_t(((index % long(capacity_)) + long(capacity_)) %
                                 long(capacity_))];
    }

    double dt_;
    int input_dim_;
    long min_index_ = 0;
    long last_ = -1;
    std::size_t capacity_ = 0;
    std::vector<Vector> data_;
    Vector u0_left_;
    bool jump_at_zero_ = false;
};

/// View of the buffer as a theta-indexed history around absolute time t.
class BufferView : public InputHistory {
public:
    BufferView(const HistoryBuffer& buffer, double t) : buffer_(buffer), t_(t) {}

    void value(double theta, Vector& out) const override {
        buffer_.lookup(t_ + theta, out);
    }
    void value_left(double theta, Vector& out) const override {
        buffer_.lookup_left(t_ + theta, out);
    }
    std::vector<double> jump_locations() const override {
        if (buffer_.jump_at_zero() && t_ >= 0.0) {
            return {-t_};
        }
        return {};
    }

private:
    const HistoryBuffer& buffer_;
    double t_;
};

/// Grid restricted to [-span, 0] together with the sampled kernel values,
/// reusing the kernel/history integrator for the distributed plant term.
KernelGrid sample_beta_kernel(const IntegralKernel& kernel,
                              const QuadratureGrid& grid) {
    const double tol = 1e-9 * std::max(grid.horizon(), 1.0);
    std::size_t start = 0;
    while (start < grid.size() && grid.points[start] < -kernel.span - tol) ++start;

    KernelGrid out;
    out.grid.points.assign(grid.points.begin() + long(start), grid.points.end());
    out.grid.split_points = grid.split_points;
    out.grid.weights.assign(out.grid.points.size(), 0.0);
    for (std::size_t j = 0; j + 1 < out.grid.points.size(); ++j) {
        const double half = 0.5 * (out.grid.points[j + 1] - out.grid.points[j]);
        out.grid.weights[j] += half;
        out.grid.weights[j + 1] += half;
    }

    auto is_jump = [&kernel, tol](double tau) {
        for (double d : kernel.discontinuities) {
            if (std::abs(d - tau) <= tol) return true;
        }
        return false;
    };
    out.samples.reserve(out.grid.points.size());
    out.left_samples.reserve(out.grid.points.size());
    for (double tau : out.grid.points) {
        out.samples.push_back(kernel.values(tau));
        out.left_samples.push_back(is_jump(tau) ? kernel_value_left(kernel, tau)
                                                : out.samples.back());
    }
    return out;
}

}  // namespace

Vector control_output(const Vector& x, const InputHistory& u_hist,
                      const KernelGrid& q_hat, const Matrix& f) {
    if (x.size() != q_hat.rows()) {
        throw std::invalid_argument("control_output: state dimension mismatch");
    }
    const auto samples = detail::sample_history(u_hist, q_hat.grid);
    return f * (x + detail::integrate_kernel_history(q_hat, samples));
}

Vector plant_rhs(const Vector& x, const InputHistory& u_hist_including_now,
                 const DelaySystem& sys) {
    if (x.size() != sys.state_dim) {
        throw std::invalid_argument("plant_rhs: state dimension mismatch");
    }
    Vector out = sys.a_matrix * x;
    Vector scratch(sys.input_dim);
    for (const auto& tap : sys.discrete_taps) {
        u_hist_including_now.value(-tap.delay, scratch);
        out.noalias() += tap.gain * scratch;
    }
    if (sys.integral_kernel && sys.integral_kernel->span > 0.0) {
        const QuadratureGrid grid = make_quadrature_grid(
            sys.integral_kernel->span, 2001, sys.integral_kernel->discontinuities);
        const KernelGrid beta = sample_beta_kernel(*sys.integral_kernel, grid);
        const auto samples = detail::sample_history(u_hist_including_now, beta.grid);
        out += detail::integrate_kernel_history(beta, samples);
    }
    return out;
}

double evaluate_functional(const Vector& x, const InputHistory& u_hist,
                           const KernelGrid& kernel, const Matrix& v_mat,
                           const Matrix& w_dprime, double sigma) {
    const auto samples = detail::sample_history(u_hist, kernel.grid);
    const Vector y = x + detail::integrate_kernel_history(kernel, samples);
    return y.dot(v_mat * y) +
           detail::integrate_weighted_l2(kernel.grid, samples, w_dprime, sigma);
}

Trajectory simulate(const DelaySystem& plant, const ControllerSpec& controller,
                    const SimConfig& cfg, const RobustnessCertificate* cert,
                    const WeightChoice* weights) {
    if (plant.state_dim != controller.model.state_dim ||
        plant.input_dim != controller.model.input_dim) {
        throw std::invalid_argument("simulate: plant/model dimension mismatch");
    }
    if (std::abs(plant.horizon - controller.model.horizon) >
        1e-12 * std::max(plant.horizon, 1.0)) {
        throw std::invalid_argument(
            "simulate: plant and controller model must share one horizon");
    }
    const double h = plant.horizon;
    if (!(cfg.dt > 0.0) || cfg.dt > h / 10.0 + 1e-15) {
        throw std::invalid_argument("simulate: dt must be positive and at most h/10");
    }
    if (cfg.t_final < cfg.dt) {
        throw std::invalid_argument("simulate: t_final must be at least dt");
    }
    if (cfg.record_stride < 1) {
        throw std::invalid_argument("simulate: record stride must be positive");
    }
    if (cfg.x0.size() != plant.state_dim) {
        throw std::invalid_argument("simulate: x0 has wrong dimension");
    }
    const bool with_functional = cert != nullptr && weights != nullptr;

    const QuadratureGrid grid =
        make_shared_grid(plant, controller.model, cfg.grid_points);
    const KernelGrid q = compute_kernel(plant, grid);
    const KernelGrid q_hat = compute_kernel(controller.model, grid);

    KernelGrid beta;
    const bool has_kernel =
        plant.integral_kernel && plant.integral_kernel->span > 0.0;
    if (has_kernel) {
        beta = sample_beta_kernel(*plant.integral_kernel, grid);
    }

    HistoryBuffer buffer(plant.input_dim, cfg.dt, h, cfg.u_init);
    const long n_steps = std::max(1L, std::lround(cfg.t_final / cfg.dt));

    Trajectory traj;
    const std::size_t expected = std::size_t(n_steps / cfg.record_stride) + 1;
    traj.times.reserve(expected);
    traj.x_samples.reserve(expected);
    traj.u_samples.reserve(expected);
    traj.y_samples.reserve(expected);
    traj.v_samples.reserve(expected);
    traj.u_hist_l2.reserve(expected);

    const Matrix identity_r = Matrix::Identity(plant.input_dim, plant.input_dim);
    Vector x = cfg.x0;
    Vector scratch(plant.input_dim);

    // The final stage of a step sits on its right boundary; delayed taps
    // read left limits there so a control jump landing exactly on a step
    // boundary is integrated with correct Riemann semantics.
    auto rhs = [&](double s, const Vector& xs, bool left_limits, Vector& out) {
        out.noalias() = plant.a_matrix * xs;
        for (const auto& tap : plant.discrete_taps) {
            if (left_limits) {
                buffer.lookup_left(s - tap.delay, scratch);
            } else {
                buffer.lookup(s - tap.delay, scratch);
            }
            out.noalias() += tap.gain * scratch;
        }
        if (has_kernel) {
            const BufferView view(buffer, s);
            const auto samples = detail::sample_history(view, beta.grid);
            out += detail::integrate_kernel_history(beta, samples);
        }
    };

    Vector f1(plant.state_dim), f2(plant.state_dim), f3(plant.state_dim),
        f4(plant.state_dim);

    for (long k = 0; k <= n_steps; ++k) {
        const double t = double(k) * cfg.dt;

        const BufferView view(buffer, t);
        const auto pre = detail::sample_history(view, grid);
        const Vector u_now =
            controller.gain * (x + detail::integrate_kernel_history(q_hat, pre));
        buffer.push(k, u_now);

        if (k % cfg.record_stride == 0) {
            // records re-sample after the push so the newest step of history
            // interpolates to u(t) instead of holding the previous sample
            const auto rec = detail::sample_history(view, grid);
            const Vector y = x + detail::integrate_kernel_history(q, rec);
            traj.times.push_back(t);
            traj.x_samples.push_back(x);
            traj.u_samples.push_back(u_now);
            traj.y_samples.push_back(y);
            traj.u_hist_l2.push_back(
                detail::integrate_weighted_l2(grid, rec, identity_r, 0.0));
            if (with_functional) {
                const double tail = detail::integrate_weighted_l2(
                    grid, rec, weights->w_dprime, cert->sigma);
                traj.v_samples.push_back(y.dot(cert->v_matrix * y) + tail);
            } else {
                traj.v_samples.push_back(0.0);
            }
        }
        if (k == n_steps) break;

        rhs(t, x, false, f1);
        rhs(t + 0.5 * cfg.dt, x + 0.5 * cfg.dt * f1, false, f2);
        rhs(t + 0.5 * cfg.dt, x + 0.5 * cfg.dt * f2, false, f3);
        rhs(t + cfg.dt, x + cfg.dt * f3, true, f4);
        x += (cfg.dt / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);

        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceGuard) {
            std::ostringstream msg;
            msg << "simulation diverged at t = " << (t + cfg.dt);
            throw DivergenceError(t + cfg.dt, msg.str());
        }
    }
    return traj;
}

EnvelopeReport verify_envelope(const Trajectory& traj,
                               const RobustnessCertificate& cert,
                               double x0_norm_sq, double u0_norm_sq) {
    if (traj.times.empty() || traj.v_samples.size() != traj.times.size()) {
        throw std::domain_error("verify_envelope: trajectory lacks functional samples");
    }
    const double v0 = traj.v_samples.front();
    const double initial = x0_norm_sq + u0_norm_sq;

    EnvelopeReport rep{0.0, 0.0, 0.0, false};
    rep.vacuous = v0 <= 0.0 && initial <= 0.0;
    if (rep.vacuous) return rep;

    const double x_budget = cert.envelope_x * initial;
    const double u_budget = cert.envelope_u * initial;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double gain = std::exp(cert.sigma_hat * traj.times[i]);
        if (v0 > 0.0) {
            rep.max_v_ratio = std::max(rep.max_v_ratio,
                                       traj.v_samples[i] * gain / v0);
        }
        if (x_budget > 0.0) {
            rep.max_x_ratio = std::max(
                rep.max_x_ratio, traj.x_samples[i].squaredNorm() * gain / x_budget);
        }
        if (u_budget > 0.0) {
            rep.max_u_ratio = std::max(rep.max_u_ratio,
                                       traj.u_hist_l2[i] * gain / u_budget);
        }
    }
    return rep;
}

}  // namespace predfb
