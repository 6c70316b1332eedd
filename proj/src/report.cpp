#include "predfb/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "predfb/errors.hpp"

namespace predfb {

namespace {

const char* norm_name(NormKind kind) {
    return kind == NormKind::Spectral ? "spectral" : "frobenius";
}

void append_matrix(std::ostringstream& os, const char* key, const Matrix& m) {
    os << key << " =";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            os << ' ' << format_number(m(i, j));
        }
    }
    os << '\n';
}

}  // namespace

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", value);
    return buf;
}

std::string render_certificate_report(const RobustnessCertificate& cert,
                                      const CertifyOptions& opts) {
    std::ostringstream os;
    os << "tool_version = " << PREDFB_VERSION << '\n';
    os << "grid_points = " << opts.grid_points << '\n';
    os << "norm = " << norm_name(opts.norm) << '\n';
    os << "state_dim = " << cert.v_matrix.rows() << '\n';
    append_matrix(os, "v_matrix", cert.v_matrix);
    os << "sigma = " << format_number(cert.sigma) << '\n';
    os << "upper_m = " << format_number(cert.upper_m) << '\n';
    os << "m_u = " << format_number(cert.m_u) << '\n';
    os << "m_x = " << format_number(cert.m_x) << '\n';
    append_matrix(os, "gram", cert.gram);
    os << "k1 = " << format_number(cert.k1) << '\n';
    os << "k2 = " << format_number(cert.k2) << '\n';
    os << "k3 = " << format_number(cert.k3) << '\n';
    os << "delta_q_norm = " << format_number(cert.delta_q_norm) << '\n';
    os << "delta_q_norm_sq = "
       << format_number(cert.delta_q_norm * cert.delta_q_norm) << '\n';
    os << "sigma_hat = " << format_number(cert.sigma_hat) << '\n';
    os << "threshold_sq = " << format_number(cert.threshold_sq) << '\n';
    os << "envelope_x = " << format_number(cert.envelope_x) << '\n';
    os << "envelope_u = " << format_number(cert.envelope_u) << '\n';
    os << "certified = " << (cert.certified ? "true" : "false") << '\n';
    return os.str();
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          double sigma_hat, double v0) {
    const Eigen::Index n = traj.x_samples.empty() ? 0 : traj.x_samples.front().size();
    const Eigen::Index r = traj.u_samples.empty() ? 0 : traj.u_samples.front().size();

    os << 't';
    for (Eigen::Index i = 1; i <= n; ++i) os << ",x_" << i;
    for (Eigen::Index i = 1; i <= r; ++i) os << ",u_" << i;
    for (Eigen::Index i = 1; i <= n; ++i) os << ",y_" << i;
    os << ",v,bound_v\n";

    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        os << format_number(traj.times[k]);
        for (Eigen::Index i = 0; i < n; ++i) {
            os << ',' << format_number(traj.x_samples[k](i));
        }
        for (Eigen::Index i = 0; i < r; ++i) {
            os << ',' << format_number(traj.u_samples[k](i));
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            os << ',' << format_number(traj.y_samples[k](i));
        }
        os << ',' << format_number(traj.v_samples[k]);
        os << ',' << format_number(v0 * std::exp(-sigma_hat * traj.times[k]));
        os << '\n';
    }
}

std::string render_envelope_report(const EnvelopeReport& rep, double tolerance) {
    std::ostringstream os;
    if (rep.vacuous) {
        os << "envelope = vacuous (zero initial data)\n";
        return os.str();
    }
    const double limit = 1.0 + tolerance;
    const bool ok = rep.max_v_ratio <= limit && rep.max_x_ratio <= limit &&
                    rep.max_u_ratio <= limit;
    os << "envelope_max_v_ratio = " << format_number(rep.max_v_ratio) << '\n';
    os << "envelope_max_x_ratio = " << format_number(rep.max_x_ratio) << '\n';
    os << "envelope_max_u_ratio = " << format_number(rep.max_u_ratio) << '\n';
    os << "envelope_tolerance = " << format_number(tolerance) << '\n';
    os << "envelope_ok = " << (ok ? "true" : "false") << '\n';
    return os.str();
}

std::vector<SweepRow> run_delay_sweep(const Scenario& scenario, double d_min,
                                      double d_max, double d_step, bool with_sim,
                                      const CertifyOptions& opts) {
    if (!is_single_delay(scenario)) {
        throw std::invalid_argument(
            "sweep-delay: plant must have exactly one discrete tap and no kernel");
    }
    if (!(d_step > 0.0)) {
        throw std::invalid_argument("sweep-delay: step must be positive");
    }

    std::vector<SweepRow> rows;
    const long count = long(std::floor((d_max - d_min) / d_step + 1e-9));
    for (long i = 0; i <= count; ++i) {
        const double d_hat = d_min + double(i) * d_step;
        if (d_hat < 0.0) continue;

        // each row is a fresh scenario with the model tap moved to d_hat
        Scenario row_sc = scenario;
        SystemDesc model = scenario.model ? *scenario.model : scenario.plant;
        model.discrete_taps.front().delay = d_hat;
        row_sc.model = std::move(model);

        const DelaySystem plant = build_plant(row_sc);
        const ControllerSpec controller = build_controller(row_sc);
        const WeightChoice weights = scenario_weights(row_sc);

        const RobustnessCertificate cert = certify(plant, controller, weights, opts);

        const auto corollary = corollary_single_delay(
            scenario.plant.a_matrix, scenario.plant.discrete_taps.front().gain,
            scenario.gain, scenario.plant.discrete_taps.front().delay, d_hat, weights,
            opts.norm);

        SweepRow row;
        row.delta_hat = d_hat;
        row.delta_q_sq = cert.delta_q_norm * cert.delta_q_norm;
        row.sigma_hat = cert.sigma_hat;
        row.threshold_sq = cert.threshold_sq;
        row.corollary_bound = corollary.delay_bound;
        row.certified = cert.certified;
        row.simulated = false;
        row.max_envelope_ratio = 0.0;

        if (with_sim && scenario.sim) {
            SimConfig cfg = build_sim_config(row_sc);
            row.simulated = true;
            try {
                const Trajectory traj =
                    simulate(plant, controller, cfg, &cert, &weights);
                const double u0_sq =
                    traj.u_hist_l2.empty() ? 0.0 : traj.u_hist_l2.front();
                const EnvelopeReport rep =
                    verify_envelope(traj, cert, cfg.x0.squaredNorm(), u0_sq);
                row.max_envelope_ratio =
                    std::max({rep.max_v_ratio, rep.max_x_ratio, rep.max_u_ratio});
            } catch (const DivergenceError&) {
                row.max_envelope_ratio = std::numeric_limits<double>::infinity();
            }
        }
        rows.push_back(row);
    }
    return rows;
}

std::string render_sweep_table(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "delta_hat\tdelta_q_sq\tthreshold_sq\tsigma_hat\tcorollary_bound\t"
          "certified\tmax_envelope_ratio\n";
    for (const auto& row : rows) {
        os << format_number(row.delta_hat) << '\t'
           << format_number(row.delta_q_sq) << '\t'
           << format_number(row.threshold_sq) << '\t'
           << format_number(row.sigma_hat) << '\t'
           << format_number(row.corollary_bound) << '\t'
           << (row.certified ? "true" : "false") << '\t'
           << (row.simulated ? format_number(row.max_envelope_ratio)
                             : std::string("-"))
           << '\n';
    }
    return os.str();
}

std::string render_corollary_report(const CorollaryResult& result, double delta,
                                    double delta_hat) {
    std::ostringstream os;
    os << "tool_version = " << PREDFB_VERSION << '\n';
    os << "delta = " << format_number(delta) << '\n';
    os << "delta_hat = " << format_number(delta_hat) << '\n';
    os << "sigma = " << format_number(result.sigma) << '\n';
    os << "k1 = " << format_number(result.k1) << '\n';
    os << "k2 = " << format_number(result.k2) << '\n';
    os << "k3 = " << format_number(result.k3) << '\n';
    os << "delay_bound = " << format_number(result.delay_bound) << '\n';
    os << "certified = " << (result.certified ? "true" : "false") << '\n';
    return os.str();
}

}  // namespace predfb
