#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "predfb/errors.hpp"
#include "predfb/report.hpp"
#include "predfb/scenario.hpp"

namespace {

constexpr int kExitCertified = 0;
constexpr int kExitError = 1;
constexpr int kExitNotCertified = 2;
constexpr int kExitDivergence = 3;

struct CommonFlags {
    std::string scenario_path;
    std::optional<int> grid_points;
    std::string norm = "spectral";
    std::string out_path;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("scenario", flags.scenario_path, "scenario JSON file")
        ->required();
    cmd->add_option("--grid-points", flags.grid_points,
                    "quadrature nodes on [-h, 0] (default: scenario value)");
    cmd->add_option("--norm", flags.norm, "matrix norm: spectral | frobenius")
        ->check(CLI::IsMember({"spectral", "frobenius"}));
    cmd->add_option("--out", flags.out_path, "write the report to this file");
}

predfb::CertifyOptions make_options(const predfb::Scenario& scenario,
                                    const CommonFlags& flags) {
    predfb::CertifyOptions opts;
    opts.grid_points = flags.grid_points.value_or(scenario.grid_points);
    opts.norm = flags.norm == "frobenius" ? predfb::NormKind::Frobenius
                                          : predfb::NormKind::Spectral;
    return opts;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) {
        throw std::runtime_error("cannot write to " + out_path);
    }
    out << text;
}

int run_certify(const CommonFlags& flags) {
    const predfb::Scenario scenario = predfb::load_scenario_file(flags.scenario_path);
    const predfb::CertifyOptions opts = make_options(scenario, flags);
    const auto cert =
        predfb::certify(predfb::build_plant(scenario),
                        predfb::build_controller(scenario),
                        predfb::scenario_weights(scenario), opts);
    emit(predfb::render_certificate_report(cert, opts), flags.out_path);
    return cert.certified ? kExitCertified : kExitNotCertified;
}

int run_simulate(const CommonFlags& flags, std::optional<double> dt,
                 std::optional<double> t_final, double tolerance) {
    const predfb::Scenario scenario = predfb::load_scenario_file(flags.scenario_path);
    const predfb::CertifyOptions opts = make_options(scenario, flags);

    const predfb::DelaySystem plant = predfb::build_plant(scenario);
    const predfb::ControllerSpec controller = predfb::build_controller(scenario);
    const predfb::WeightChoice weights = predfb::scenario_weights(scenario);

    predfb::SimConfig cfg = predfb::build_sim_config(scenario);
    cfg.grid_points = opts.grid_points;
    if (dt) cfg.dt = *dt;
    if (t_final) cfg.t_final = *t_final;

    // a closed loop that cannot be certified is still worth simulating
    std::optional<predfb::RobustnessCertificate> cert;
    try {
        cert = predfb::certify(plant, controller, weights, opts);
    } catch (const predfb::CertificationError& e) {
        std::cerr << "certificate unavailable: " << e.what() << "\n";
    }

    const predfb::Trajectory traj =
        predfb::simulate(plant, controller, cfg, cert ? &*cert : nullptr,
                         cert ? &weights : nullptr);

    std::ostringstream csv;
    const double v0 = traj.v_samples.empty() ? 0.0 : traj.v_samples.front();
    predfb::write_trajectory_csv(csv, traj, cert ? cert->sigma_hat : 0.0,
                                 cert ? v0 : 0.0);
    const std::string out_path =
        flags.out_path.empty() ? "trajectory.csv" : flags.out_path;
    emit(csv.str(), out_path);
    std::cout << "trajectory written to " << out_path << " (" << traj.times.size()
              << " samples)\n";

    if (cert && cert->certified) {
        const double u0_sq = traj.u_hist_l2.empty() ? 0.0 : traj.u_hist_l2.front();
        const auto rep =
            predfb::verify_envelope(traj, *cert, cfg.x0.squaredNorm(), u0_sq);
        std::cout << predfb::render_envelope_report(rep, tolerance);
    } else if (cert) {
        std::cout << "not certified; envelope check skipped\n";
    }
    return kExitCertified;
}

int run_sweep(const CommonFlags& flags, double d_min, double d_max, double d_step,
              bool with_sim) {
    const predfb::Scenario scenario = predfb::load_scenario_file(flags.scenario_path);
    const predfb::CertifyOptions opts = make_options(scenario, flags);
    const auto rows =
        predfb::run_delay_sweep(scenario, d_min, d_max, d_step, with_sim, opts);
    emit(predfb::render_sweep_table(rows), flags.out_path);
    return kExitCertified;
}

int run_corollary(const CommonFlags& flags) {
    const predfb::Scenario scenario = predfb::load_scenario_file(flags.scenario_path);
    if (!predfb::is_single_delay(scenario)) {
        throw std::invalid_argument(
            "corollary: plant must have exactly one discrete tap and no kernel");
    }
    const predfb::CertifyOptions opts = make_options(scenario, flags);
    const double delta = scenario.plant.discrete_taps.front().delay;
    const double delta_hat = scenario.model && !scenario.model->discrete_taps.empty()
                                 ? scenario.model->discrete_taps.front().delay
                                 : delta;
    const auto result = predfb::corollary_single_delay(
        scenario.plant.a_matrix, scenario.plant.discrete_taps.front().gain,
        scenario.gain, delta, delta_hat, predfb::scenario_weights(scenario),
        opts.norm);
    emit(predfb::render_corollary_report(result, delta, delta_hat), flags.out_path);
    return result.certified ? kExitCertified : kExitNotCertified;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Robustness certification and closed-loop simulation of predictor "
        "feedback for linear systems with distributed input delay"};
    app.require_subcommand(1);

    CommonFlags certify_flags;
    CLI::App* certify = app.add_subcommand(
        "certify", "compute the Lyapunov-Krasovskii robustness certificate");
    add_common(certify, certify_flags);

    CommonFlags sim_flags;
    std::optional<double> dt, t_final;
    double tolerance = 0.01;
    CLI::App* simulate =
        app.add_subcommand("simulate", "integrate the closed loop and emit a CSV");
    add_common(simulate, sim_flags);
    simulate->add_option("--dt", dt, "integrator step (overrides scenario)");
    simulate->add_option("--t-final", t_final, "simulation horizon (overrides scenario)");
    simulate->add_option("--tolerance", tolerance,
                         "allowed slack on the decay envelopes (default 0.01)");

    CommonFlags sweep_flags;
    double d_min = 0.0, d_max = 0.0, d_step = 0.0;
    bool with_sim = false;
    CLI::App* sweep = app.add_subcommand(
        "sweep-delay", "certify across a range of modeled delays");
    add_common(sweep, sweep_flags);
    sweep->add_option("--min", d_min, "first modeled delay")->required();
    sweep->add_option("--max", d_max, "last modeled delay")->required();
    sweep->add_option("--step", d_step, "delay increment")->required();
    sweep->add_flag("--with-sim", with_sim, "also simulate each row");

    CommonFlags corollary_flags;
    CLI::App* corollary = app.add_subcommand(
        "corollary", "single-discrete-delay mismatch bound");
    add_common(corollary, corollary_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (certify->parsed()) return run_certify(certify_flags);
        if (simulate->parsed()) {
            return run_simulate(sim_flags, dt, t_final, tolerance);
        }
        if (sweep->parsed()) {
            return run_sweep(sweep_flags, d_min, d_max, d_step, with_sim);
        }
        if (corollary->parsed()) return run_corollary(corollary_flags);
    } catch (const predfb::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
