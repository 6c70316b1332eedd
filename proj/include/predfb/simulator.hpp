#pragma once

#include <functional>
#include <vector>

#include "predfb/certificate.hpp"
#include "predfb/delay_model.hpp"
#include "predfb/errors.hpp"
#include "predfb/history.hpp"
#include "predfb/reduction.hpp"

namespace predfb {

struct SimConfig {
    double dt = 1e-3;       // fixed integrator step, must satisfy dt <= h/10
    double t_final = 10.0;  // >= dt; rounded to a whole number of steps
    Vector x0;
    /// Initial input history on [-h, 0); null means identically zero.
    std::function<Vector(double)> u_init;
    int record_stride = 1;
    int grid_points = 2001;
};

/// Time-stamped samples along a simulated run. v_samples are zero when no
/// certificate was supplied to the simulator.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> x_samples;
    std::vector<Vector> u_samples;
    std::vector<Vector> y_samples;
    std::vector<double> v_samples;   // functional value, >= 0
    std::vector<double> u_hist_l2;   // ||u_t||^2 over the horizon window
};

/// u(t) = F (x + integral Qhat(theta) u(t+theta) dtheta). Explicit: the
/// integral carries no mass at theta = 0, so there is nothing to solve.
Vector control_output(const Vector& x, const InputHistory& u_hist,
                      const KernelGrid& q_hat, const Matrix& f);

/// Right-hand side A x + sum_i B_i u(t - h_i) + integral B_int(theta)
/// u(t+theta) dtheta. The history covers [-h, 0] with theta = 0 meaning now;
/// a tap with h_i = 0 reads the current input.
Vector plant_rhs(const Vector& x, const InputHistory& u_hist_including_now,
                 const DelaySystem& sys);

/// Lyapunov-Krasovskii functional
///   v = ||x + integral Q u||_V^2 + integral e^{sigma theta} ||u||_{W''}^2,
/// both integrals by trapezoid on the kernel grid.
double evaluate_functional(const Vector& x, const InputHistory& u_hist,
                           const KernelGrid& kernel, const Matrix& v_mat,
                           const Matrix& w_dprime, double sigma);

/// Integrates the closed loop (true plant driven by the possibly mismatched
/// predictor controller) with classical fixed-step RK4. The input history
/// lives in a ring buffer at step resolution; u(t) is computed once at each
/// step start and held for the intermediate stages. Lookups between buffer
/// nodes use linear interpolation; the jump between u_init(0-) and the
/// computed u(0) is tracked exactly. Throws DivergenceError when ||x||
/// exceeds 1e12. If cert and weights are given, v(t) is recorded along the
/// run; y(t) is always recorded.
Trajectory simulate(const DelaySystem& plant, const ControllerSpec& controller,
                    const SimConfig& cfg,
                    const RobustnessCertificate* cert = nullptr,
                    const WeightChoice* weights = nullptr);

/// Worst observed ratios against the certified decay envelopes; each must
/// stay <= 1 + tolerance on a certified run. All three are 0 when the
/// initial data is zero (the bounds are vacuously satisfied).
struct EnvelopeReport {
    double max_v_ratio;  // v(t) e^{sigma_hat t} / v(0)
    double max_x_ratio;  // ||x(t)||^2 e^{sigma_hat t} / ((M/m_x)(x0^2 + u0^2))
    double max_u_ratio;  // ||u_t||^2 e^{sigma_hat t} / ((M/m_u)(x0^2 + u0^2))
    bool vacuous;
};

EnvelopeReport verify_envelope(const Trajectory& traj,
                               const RobustnessCertificate& cert,
                               double x0_norm_sq, double u0_norm_sq);

}  // namespace predfb
