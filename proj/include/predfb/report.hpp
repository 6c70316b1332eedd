#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "predfb/certificate.hpp"
#include "predfb/scenario.hpp"
#include "predfb/simulator.hpp"

namespace predfb {

/// 17-significant-digit decimal rendering used by every emitted number, so
/// reports and CSVs round-trip exactly.
std::string format_number(double value);

/// Flat key-value document mirroring the certificate fields plus tool
/// version and grid resolution.
std::string render_certificate_report(const RobustnessCertificate& cert,
                                      const CertifyOptions& opts);

/// Columns: t, x_1..x_n, u_1..u_r, y_1..y_n, v, bound_v where
/// bound_v = v(0) e^{-sigma_hat t}. Pass sigma_hat = 0 and v0 = 0 when the
/// run carries no certificate.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          double sigma_hat, double v0);

std::string render_envelope_report(const EnvelopeReport& rep, double tolerance);

struct SweepRow {
    double delta_hat;
    double delta_q_sq;
    double sigma_hat;
    double threshold_sq;
    double corollary_bound;
    bool certified;
    bool simulated;
    double max_envelope_ratio;  // meaningful only when simulated
};

/// Certifies the scenario once per delta_hat in [d_min, d_max] stepping by
/// d_step (single-discrete-delay plants only). Each row is an independent
/// job over pure inputs; rows are emitted in ascending delta_hat order.
std::vector<SweepRow> run_delay_sweep(const Scenario& scenario, double d_min,
                                      double d_max, double d_step, bool with_sim,
                                      const CertifyOptions& opts);

std::string render_sweep_table(const std::vector<SweepRow>& rows);

std::string render_corollary_report(const CorollaryResult& result,
                                    double delta, double delta_hat);

}  // namespace predfb
