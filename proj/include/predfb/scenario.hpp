#pragma once

#include <optional>
#include <string>
#include <vector>

#include "predfb/certificate.hpp"
#include "predfb/delay_model.hpp"
#include "predfb/simulator.hpp"

namespace predfb {

/// Sampled representation of a distributed kernel: value rows are n x r
/// matrices at increasing theta knots in [-span, 0]; a repeated knot encodes
/// a jump (first row = left limit, second = right limit). Values between
/// knots are linearly interpolated.
struct KernelTable {
    double span = 0.0;
    std::vector<double> thetas;
    std::vector<Matrix> values;
};

struct SystemDesc {
    int state_dim = 0;
    int input_dim = 0;
    Matrix a_matrix;
    std::vector<DiscreteTap> discrete_taps;
    std::optional<KernelTable> integral_kernel;
};

/// Piecewise-constant initial input history: values[i] on
/// [thetas[i], thetas[i+1]), the first value extending back to -h and the
/// last forward to 0.
struct InitHistoryTable {
    std::vector<double> thetas;
    std::vector<Vector> values;
};

struct SimDesc {
    double dt = 1e-3;
    double t_final = 10.0;
    Vector x0;
    std::optional<InitHistoryTable> u_init;
    int record_stride = 10;
};

/// One certification/simulation case as read from a scenario file. A missing
/// model means the controller uses the exact plant; missing weights default
/// to W' = I, W'' = I/2.
struct Scenario {
    SystemDesc plant;
    std::optional<SystemDesc> model;
    Matrix gain;
    std::optional<WeightChoice> weights;
    int grid_points = 2001;
    std::optional<SimDesc> sim;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

/// Canonical serialization: fixed key order, so serialize(parse(s)) is
/// byte-identical to s for canonical inputs.
std::string serialize_scenario(const Scenario& scenario);

/// Domain objects with the shared horizon already applied to both systems.
DelaySystem build_plant(const Scenario& scenario);
ControllerSpec build_controller(const Scenario& scenario);
WeightChoice scenario_weights(const Scenario& scenario);
SimConfig build_sim_config(const Scenario& scenario);

/// True when the plant has exactly one discrete tap and no distributed
/// kernel (the shape the delay sweep and the single-delay bound require).
bool is_single_delay(const Scenario& scenario);

}  // namespace predfb
