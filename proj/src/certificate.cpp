#include "predfb/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "predfb/errors.hpp"

namespace predfb {

namespace {

void require_spd(const Matrix& m, const char* name) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument(std::string(name) + " must be square");
    }
    const auto [lo, hi] = sym_eig_extremes(m);
    if (!(lo > 0.0)) {
        throw std::invalid_argument(std::string(name) +
                                    " must be symmetric positive definite");
    }
    (void)hi;
}

Matrix spd_inverse(const Matrix& m, const char* name) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error(std::string(name) + ": Cholesky factorization failed");
    }
    Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

}  // namespace

WeightChoice default_weights(int state_dim, int input_dim) {
    return {Matrix::Identity(state_dim, state_dim),
            0.5 * Matrix::Identity(input_dim, input_dim)};
}

Matrix lyapunov_matrix(const Matrix& a, const Matrix& q0, const Matrix& f,
                       const WeightChoice& w) {
    require_spd(w.w_prime, "W'");
    require_spd(w.w_dprime, "W''");
    const Matrix a_cl = a + q0 * f;
    const double abscissa = spectral_abscissa(a_cl);
    if (!(abscissa < 0.0)) {
        std::ostringstream msg;
        msg << "closed-loop matrix not Hurwitz (spectral abscissa " << abscissa << ")";
        throw CertificationError(msg.str());
    }
    const Matrix rhs = w.w_prime + 2.0 * f.transpose() * w.w_dprime * f;
    return solve_lyapunov(a_cl, rhs);
}

double decay_rate_sigma(const Matrix& v, const Matrix& w_prime) {
    return sym_eig_extremes(w_prime).first / sym_eig_extremes(v).second;
}

double upper_bound_m(const Matrix& v, const Matrix& w_dprime, const Matrix& a,
                     const KernelGrid& kernel, double h, NormKind norm) {
    const double lambda_v = sym_eig_extremes(v).second;
    const double lambda_w = sym_eig_extremes(w_dprime).second;

    double max_q_sq = 0.0;
    for (std::size_t j = 0; j < kernel.samples.size(); ++j) {
        max_q_sq = std::max(max_q_sq,
                            std::pow(matrix_norm(kernel.samples[j], norm), 2));
        max_q_sq = std::max(max_q_sq,
                            std::pow(matrix_norm(kernel.left_samples[j], norm), 2));
    }

    const double transition = matrix_norm(expm(h * a), norm);
    return std::max(2.0 * lambda_v * transition * transition,
                    lambda_w + 2.0 * h * lambda_v * max_q_sq);
}

std::pair<double, double> lower_bounds(const Matrix& v, const Matrix& w_dprime,
                                       double sigma, double h, const Matrix& gram) {
    const double m_u = std::exp(-sigma * h) * sym_eig_extremes(w_dprime).first;
    const Matrix inner = spd_inverse(v, "lower_bounds: V") + gram / m_u;
    const double m_x = sym_eig_extremes(spd_inverse(inner, "lower_bounds")).first;
    return {m_u, m_x};
}

std::pair<double, double> robustness_gains(const Matrix& v, const Matrix& q0,
                                           const Matrix& f, const Matrix& w_dprime,
                                           double m_u, NormKind norm) {
    if (!(m_u > 0.0)) {
        throw std::invalid_argument("robustness_gains: m_u must be positive");
    }
    const double lambda_v_min = sym_eig_extremes(v).first;
    const double k1 = matrix_norm(v * q0 * f, norm) / std::min(lambda_v_min, m_u);
    const double norm_f = matrix_norm(f, norm);
    const double k2 = 2.0 * sym_eig_extremes(w_dprime).second * norm_f * norm_f / m_u;
    return {k1, k2};
}

double robustness_threshold(double sigma, double k1, double k2) {
    if (!(sigma > 0.0)) {
        throw CertificationError("robustness_threshold: decay rate sigma must be positive");
    }
    if (k2 > 0.0) {
        // positive root of k2 z^2 + k1 z - sigma = 0, written without the
        // cancellation-prone sqrt difference
        const double z = 2.0 * sigma / (std::sqrt(k1 * k1 + 4.0 * k2 * sigma) + k1);
        return z * z;
    }
    if (k1 > 0.0) {
        const double z = sigma / k1;
        return z * z;
    }
    return std::numeric_limits<double>::infinity();
}

RobustnessCertificate certify(const DelaySystem& plant,
                              const ControllerSpec& controller,
                              const WeightChoice& w, const CertifyOptions& opts) {
    if (plant.input_dim != controller.model.input_dim ||
        plant.state_dim != controller.model.state_dim) {
        throw std::invalid_argument("certify: plant/model dimension mismatch");
    }
    if (std::abs(plant.horizon - controller.model.horizon) >
        1e-12 * std::max(plant.horizon, 1.0)) {
        throw std::invalid_argument(
            "certify: plant and controller model must share one horizon");
    }
    require_spd(w.w_prime, "W'");
    require_spd(w.w_dprime, "W''");

    const QuadratureGrid grid =
        make_shared_grid(plant, controller.model, opts.grid_points);
    const KernelGrid q = compute_kernel(plant, grid);
    const KernelGrid q_hat = compute_kernel(controller.model, grid);

    const Matrix q0 = q_at_zero(q);
    const Matrix a_cl = plant.a_matrix + q0 * controller.gain;
    const double abscissa = spectral_abscissa(a_cl);
    if (!(abscissa < -opts.hurwitz_margin)) {
        std::ostringstream msg;
        msg << "closed-loop matrix not Hurwitz (spectral abscissa " << abscissa << ")";
        throw CertificationError(msg.str());
    }

    RobustnessCertificate cert;
    cert.v_matrix = lyapunov_matrix(plant.a_matrix, q0, controller.gain, w);
    cert.sigma = decay_rate_sigma(cert.v_matrix, w.w_prime);

    const double h = plant.horizon;
    cert.upper_m =
        upper_bound_m(cert.v_matrix, w.w_dprime, plant.a_matrix, q, h, opts.norm);
    cert.gram = gram_matrix(q);
    std::tie(cert.m_u, cert.m_x) =
        lower_bounds(cert.v_matrix, w.w_dprime, cert.sigma, h, cert.gram);
    std::tie(cert.k1, cert.k2) = robustness_gains(cert.v_matrix, q0, controller.gain,
                                                  w.w_dprime, cert.m_u, opts.norm);

    cert.delta_q_norm = delta_kernel_norm(q, q_hat);
    cert.sigma_hat = cert.sigma - cert.k1 * cert.delta_q_norm -
                     cert.k2 * cert.delta_q_norm * cert.delta_q_norm;
    cert.threshold_sq = robustness_threshold(cert.sigma, cert.k1, cert.k2);
    cert.certified = cert.delta_q_norm * cert.delta_q_norm < cert.threshold_sq;

    cert.k3 = 0.0;
    if (plant.discrete_taps.size() == 1 && !plant.integral_kernel &&
        std::isfinite(cert.threshold_sq)) {
        const double na = matrix_norm(plant.a_matrix, opts.norm);
        const double nb = matrix_norm(plant.discrete_taps.front().gain, opts.norm);
        if (nb > 0.0) {
            cert.k3 = 2.0 * na / (nb * nb) * cert.threshold_sq;
        }
    }

    cert.envelope_x = cert.upper_m / cert.m_x;
    cert.envelope_u = cert.upper_m / cert.m_u;
    return cert;
}

CorollaryResult corollary_single_delay(const Matrix& a, const Matrix& b,
                                       const Matrix& f, double delta,
                                       double delta_hat_probe, const WeightChoice& w,
                                       NormKind norm) {
    if (delta < 0.0 || delta_hat_probe < 0.0) {
        throw std::domain_error("corollary_single_delay: delays must be nonnegative");
    }
    require_spd(w.w_prime, "W'");
    require_spd(w.w_dprime, "W''");

    const double h = std::max(delta, delta_hat_probe);
    const Matrix q0 = expm(-delta * a) * b;

    CorollaryResult res;
    const Matrix v = lyapunov_matrix(a, q0, f, w);
    res.sigma = decay_rate_sigma(v, w.w_prime);

    const double m_u = std::exp(-res.sigma * h) * sym_eig_extremes(w.w_dprime).first;
    std::tie(res.k1, res.k2) = robustness_gains(v, q0, f, w.w_dprime, m_u, norm);

    const double threshold = robustness_threshold(res.sigma, res.k1, res.k2);
    const double na = matrix_norm(a, norm);
    const double nb = matrix_norm(b, norm);

    if (nb == 0.0 || !std::isfinite(threshold)) {
        res.k3 = (na > 0.0) ? std::numeric_limits<double>::infinity() : 0.0;
        res.delay_bound = std::numeric_limits<double>::infinity();
    } else if (na > 0.0) {
        res.k3 = 2.0 * na / (nb * nb) * threshold;
        const double amp = std::exp(2.0 * na * h);
        res.delay_bound =
            std::log(1.0 + (std::sqrt(1.0 + res.k3 * amp) - 1.0) / amp) / na;
    } else {
        res.k3 = 0.0;
        res.delay_bound = threshold / (nb * nb);
    }
    res.certified = std::abs(delta_hat_probe - delta) < res.delay_bound;
    return res;
}

}  // namespace predfb
