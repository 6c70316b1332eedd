#pragma once

#include "predfb/delay_model.hpp"
#include "predfb/reduction.hpp"

namespace predfb {

/// Free weights of the Lyapunov-Krasovskii functional. Any symmetric
/// positive definite pair is admissible; the defaults are W' = I, W'' = I/2.
struct WeightChoice {
    Matrix w_prime;   // n x n, SPD
    Matrix w_dprime;  // r x r, SPD
};

WeightChoice default_weights(int state_dim, int input_dim);

struct CertifyOptions {
    int grid_points = 2001;
    NormKind norm = NormKind::Spectral;
    /// Certification demands spectral_abscissa(A + Q(0)F) < -hurwitz_margin
    /// to reject numerically marginal loops.
    double hurwitz_margin = 1e-9;
};

/// Everything the functional analysis produces for one plant/controller pair.
///
/// sigma_hat = sigma - k1*||DeltaQ|| - k2*||DeltaQ||^2 is the mismatch-degraded
/// decay rate; `certified` means ||DeltaQ||^2 lies strictly below threshold_sq
/// (the squared positive root of k2 z^2 + k1 z - sigma = 0) and the nominal
/// closed-loop matrix is Hurwitz with margin. A false flag means "not
/// certified by this functional", never "unstable": the test is sufficient,
/// not necessary.
struct RobustnessCertificate {
    Matrix v_matrix;      // SPD solution of the closed-loop Lyapunov equation
    double sigma;         // lambda_min(W') / lambda_max(V)
    double upper_m;       // quadratic upper bound constant M
    double m_u;           // e^{-sigma h} lambda_min(W'')
    double m_x;           // lambda_min((V^{-1} + m_u^{-1} G)^{-1})
    Matrix gram;          // G = integral Q Q^T
    double k1;
    double k2;
    double k3;            // single-delay constant; 0 unless the plant is one tap
    double delta_q_norm;  // ||DeltaQ||
    double sigma_hat;
    double threshold_sq;
    bool certified;
    double envelope_x;    // M / m_x
    double envelope_u;    // M / m_u
};

/// V solving (A + q0 F)^T V + V (A + q0 F) = -(W' + 2 F^T W'' F).
/// Requires SPD weights and a Hurwitz closed-loop matrix.
Matrix lyapunov_matrix(const Matrix& a, const Matrix& q0, const Matrix& f,
                       const WeightChoice& w);

/// sigma = lambda_min(W') / lambda_max(V).
double decay_rate_sigma(const Matrix& v, const Matrix& w_prime);

/// M = max{ 2 lambda_max(V) ||e^{Ah}||^2,
///          lambda_max(W'') + 2h lambda_max(V) max_theta ||Q(theta)||^2 },
/// the max over the kernel grid including both sides of each atom.
double upper_bound_m(const Matrix& v, const Matrix& w_dprime, const Matrix& a,
                     const KernelGrid& kernel, double h,
                     NormKind norm = NormKind::Spectral);

/// (m_u, m_x): m_u = e^{-sigma h} lambda_min(W''),
/// m_x = lambda_min((V^{-1} + m_u^{-1} G)^{-1}), the inner inverse computed
/// by linear solves and symmetrized.
std::pair<double, double> lower_bounds(const Matrix& v, const Matrix& w_dprime,
                                       double sigma, double h, const Matrix& gram);

/// (k1, k2): k1 = ||V Q(0) F|| / min{lambda_min(V), m_u},
///           k2 = 2 lambda_max(W'') ||F||^2 / m_u.
std::pair<double, double> robustness_gains(const Matrix& v, const Matrix& q0,
                                           const Matrix& f, const Matrix& w_dprime,
                                           double m_u,
                                           NormKind norm = NormKind::Spectral);

/// Squared positive root of k2 z^2 + k1 z - sigma = 0. Degenerate branches:
/// (sigma/k1)^2 when k2 = 0 and k1 > 0; +infinity when both vanish.
double robustness_threshold(double sigma, double k1, double k2);

/// Full pipeline: kernels for plant and model on a shared grid, V, sigma, M,
/// m_u, m_x, G, k1, k2, ||DeltaQ||, sigma_hat, threshold, decision and decay
/// envelope constants.
RobustnessCertificate certify(const DelaySystem& plant,
                              const ControllerSpec& controller,
                              const WeightChoice& w,
                              const CertifyOptions& opts = {});

struct CorollaryResult {
    double sigma;
    double k1;
    double k2;
    double k3;
    double delay_bound;  // admissible |delta_hat - delta|; may be +infinity
    bool certified;
};

/// Single-discrete-delay specialization: xdot = A x + B u(t - delta) with the
/// controller built for delta_hat. Uses h = max(delta, delta_hat) and the
/// logarithmic delay-mismatch bound (or its ||A|| = 0 limit, which equals
/// robustness_threshold / ||B||^2).
CorollaryResult corollary_single_delay(const Matrix& a, const Matrix& b,
                                       const Matrix& f, double delta,
                                       double delta_hat_probe,
                                       const WeightChoice& w,
                                       NormKind norm = NormKind::Spectral);

}  // namespace predfb
