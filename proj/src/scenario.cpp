#include "predfb/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace predfb {

namespace {

using ordered_json = nlohmann::ordered_json;

Matrix matrix_from_flat(const ordered_json& arr, int rows, int cols,
                        const char* name) {
    if (!arr.is_array() || int(arr.size()) != rows * cols) {
        throw std::invalid_argument(std::string("scenario: ") + name +
                                    " must be a row-major array of " +
                                    std::to_string(rows * cols) + " numbers");
    }
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            m(i, j) = arr.at(std::size_t(i * cols + j)).get<double>();
        }
    }
    return m;
}

ordered_json flat_from_matrix(const Matrix& m) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            arr.push_back(m(i, j));
        }
    }
    return arr;
}

SystemDesc parse_system(const ordered_json& j, const char* name) {
    if (!j.is_object()) {
        throw std::invalid_argument(std::string("scenario: ") + name +
                                    " must be an object");
    }
    SystemDesc desc;
    desc.state_dim = j.at("state_dim").get<int>();
    desc.input_dim = j.at("input_dim").get<int>();
    if (desc.state_dim < 1 || desc.input_dim < 1) {
        throw std::invalid_argument("scenario: dimensions must be positive");
    }
    desc.a_matrix =
        matrix_from_flat(j.at("a_matrix"), desc.state_dim, desc.state_dim, "a_matrix");

    for (const auto& tap : j.at("discrete_taps")) {
        DiscreteTap t;
        t.gain = matrix_from_flat(tap.at("gain"), desc.state_dim, desc.input_dim,
                                  "tap gain");
        t.delay = tap.at("delay").get<double>();
        desc.discrete_taps.push_back(std::move(t));
    }

    if (j.contains("integral_kernel") && !j.at("integral_kernel").is_null()) {
        const auto& jk = j.at("integral_kernel");
        KernelTable table;
        table.span = jk.at("span").get<double>();
        for (const auto& th : jk.at("theta")) {
            table.thetas.push_back(th.get<double>());
        }
        for (const auto& row : jk.at("values")) {
            table.values.push_back(
                matrix_from_flat(row, desc.state_dim, desc.input_dim, "kernel value"));
        }
        if (table.thetas.size() < 2 || table.thetas.size() != table.values.size()) {
            throw std::invalid_argument(
                "scenario: kernel table needs matching theta/value rows");
        }
        if (!std::is_sorted(table.thetas.begin(), table.thetas.end())) {
            throw std::invalid_argument("scenario: kernel thetas must be increasing");
        }
        if (std::abs(table.thetas.front() + table.span) > 1e-12 ||
            std::abs(table.thetas.back()) > 1e-12) {
            throw std::invalid_argument(
                "scenario: kernel table must cover [-span, 0]");
        }
        desc.integral_kernel = std::move(table);
    }
    return desc;
}

ordered_json dump_system(const SystemDesc& desc) {
    ordered_json j;
    j["state_dim"] = desc.state_dim;
    j["input_dim"] = desc.input_dim;
    j["a_matrix"] = flat_from_matrix(desc.a_matrix);
    ordered_json taps = ordered_json::array();
    for (const auto& tap : desc.discrete_taps) {
        ordered_json t;
        t["gain"] = flat_from_matrix(tap.gain);
        t["delay"] = tap.delay;
        taps.push_back(std::move(t));
    }
    j["discrete_taps"] = std::move(taps);
    if (desc.integral_kernel) {
        ordered_json jk;
        jk["span"] = desc.integral_kernel->span;
        jk["theta"] = desc.integral_kernel->thetas;
        ordered_json vals = ordered_json::array();
        for (const auto& v : desc.integral_kernel->values) {
            vals.push_back(flat_from_matrix(v));
        }
        jk["values"] = std::move(vals);
        j["integral_kernel"] = std::move(jk);
    } else {
        j["integral_kernel"] = nullptr;
    }
    return j;
}

/// Piecewise-linear interpolation of a kernel table; a repeated knot is a
/// jump and evaluation at it returns the right row.
IntegralKernel kernel_from_table(const KernelTable& table) {
    IntegralKernel kernel;
    kernel.span = table.span;
    for (std::size_t i = 1; i < table.thetas.size(); ++i) {
        if (table.thetas[i] == table.thetas[i - 1]) {
            kernel.discontinuities.push_back(table.thetas[i]);
        }
    }
    auto thetas = table.thetas;
    auto values = table.values;
    kernel.values = [thetas, values](double tau) -> Matrix {
        auto it = std::upper_bound(thetas.begin(), thetas.end(), tau);
        if (it == thetas.begin()) return values.front();
        if (it == thetas.end()) return values.back();
        const std::size_t hi = std::size_t(it - thetas.begin());
        const std::size_t lo = hi - 1;
        if (thetas[lo] == tau) return values[lo];
        const double width = thetas[hi] - thetas[lo];
        if (width <= 0.0) return values[hi];
        const double alpha = (tau - thetas[lo]) / width;
        return (1.0 - alpha) * values[lo] + alpha * values[hi];
    };
    return kernel;
}

DelaySystem system_from_desc(const SystemDesc& desc, double horizon) {
    std::optional<IntegralKernel> kernel;
    if (desc.integral_kernel) {
        kernel = kernel_from_table(*desc.integral_kernel);
    }
    return DelaySystem(desc.a_matrix, desc.input_dim, desc.discrete_taps,
                       std::move(kernel), horizon);
}

double desc_max_delay(const SystemDesc& desc) {
    double m = 0.0;
    for (const auto& tap : desc.discrete_taps) m = std::max(m, tap.delay);
    if (desc.integral_kernel) m = std::max(m, desc.integral_kernel->span);
    return m;
}

double scenario_horizon(const Scenario& scenario) {
    const double plant_delay = desc_max_delay(scenario.plant);
    const double model_delay =
        scenario.model ? desc_max_delay(*scenario.model) : plant_delay;
    const double h = std::max(plant_delay, model_delay);
    if (!(h > 0.0)) {
        throw std::invalid_argument("scenario: system has no delay content");
    }
    return h;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
    }
    try {
        Scenario sc;
        sc.plant = parse_system(j.at("plant"), "plant");
        if (j.contains("model") && !j.at("model").is_null()) {
            sc.model = parse_system(j.at("model"), "model");
            if (sc.model->state_dim != sc.plant.state_dim ||
                sc.model->input_dim != sc.plant.input_dim) {
                throw std::invalid_argument(
                    "scenario: model dimensions must match the plant");
            }
        }
        sc.gain = matrix_from_flat(j.at("gain"), sc.plant.input_dim,
                                   sc.plant.state_dim, "gain");
        if (j.contains("weights") && !j.at("weights").is_null()) {
            const auto& w = j.at("weights");
            WeightChoice weights;
            weights.w_prime = matrix_from_flat(w.at("w_prime"), sc.plant.state_dim,
                                               sc.plant.state_dim, "w_prime");
            weights.w_dprime = matrix_from_flat(w.at("w_dprime"), sc.plant.input_dim,
                                                sc.plant.input_dim, "w_dprime");
            sc.weights = std::move(weights);
        }
        if (j.contains("grid_points") && !j.at("grid_points").is_null()) {
            sc.grid_points = j.at("grid_points").get<int>();
            if (sc.grid_points < 3) {
                throw std::invalid_argument("scenario: grid_points must be at least 3");
            }
        }
        if (j.contains("sim") && !j.at("sim").is_null()) {
            const auto& js = j.at("sim");
            SimDesc sim;
            if (js.contains("dt")) sim.dt = js.at("dt").get<double>();
            if (js.contains("t_final")) sim.t_final = js.at("t_final").get<double>();
            if (js.contains("x0")) {
                sim.x0 = matrix_from_flat(js.at("x0"), sc.plant.state_dim, 1, "x0");
            } else {
                sim.x0 = Vector::Zero(sc.plant.state_dim);
            }
            if (js.contains("u_init") && !js.at("u_init").is_null()) {
                InitHistoryTable table;
                for (const auto& th : js.at("u_init").at("theta")) {
                    table.thetas.push_back(th.get<double>());
                }
                for (const auto& row : js.at("u_init").at("values")) {
                    table.values.push_back(
                        matrix_from_flat(row, sc.plant.input_dim, 1, "u_init value"));
                }
                if (table.thetas.empty() ||
                    table.thetas.size() != table.values.size() ||
                    !std::is_sorted(table.thetas.begin(), table.thetas.end())) {
                    throw std::invalid_argument("scenario: malformed u_init table");
                }
                sim.u_init = std::move(table);
            }
            if (js.contains("record_stride")) {
                sim.record_stride = js.at("record_stride").get<int>();
            }
            sc.sim = std::move(sim);
        }
        return sc;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("scenario: missing or bad field: ") +
                                    e.what());
    }
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("scenario: cannot open file " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& scenario) {
    ordered_json j;
    j["plant"] = dump_system(scenario.plant);
    j["model"] = scenario.model ? dump_system(*scenario.model) : ordered_json(nullptr);
    j["gain"] = flat_from_matrix(scenario.gain);
    if (scenario.weights) {
        ordered_json w;
        w["w_prime"] = flat_from_matrix(scenario.weights->w_prime);
        w["w_dprime"] = flat_from_matrix(scenario.weights->w_dprime);
        j["weights"] = std::move(w);
    } else {
        j["weights"] = nullptr;
    }
    j["grid_points"] = scenario.grid_points;
    if (scenario.sim) {
        ordered_json s;
        s["dt"] = scenario.sim->dt;
        s["t_final"] = scenario.sim->t_final;
        s["x0"] = flat_from_matrix(scenario.sim->x0);
        if (scenario.sim->u_init) {
            ordered_json u;
            u["theta"] = scenario.sim->u_init->thetas;
            ordered_json vals = ordered_json::array();
            for (const auto& v : scenario.sim->u_init->values) {
                vals.push_back(flat_from_matrix(v));
            }
            u["values"] = std::move(vals);
            s["u_init"] = std::move(u);
        } else {
            s["u_init"] = nullptr;
        }
        s["record_stride"] = scenario.sim->record_stride;
        j["sim"] = std::move(s);
    } else {
        j["sim"] = nullptr;
    }
    return j.dump(2) + "\n";
}

DelaySystem build_plant(const Scenario& scenario) {
    return system_from_desc(scenario.plant, scenario_horizon(scenario));
}

ControllerSpec build_controller(const Scenario& scenario) {
    const SystemDesc& desc = scenario.model ? *scenario.model : scenario.plant;
    return ControllerSpec(system_from_desc(desc, scenario_horizon(scenario)),
                          scenario.gain);
}

WeightChoice scenario_weights(const Scenario& scenario) {
    if (scenario.weights) return *scenario.weights;
    return default_weights(scenario.plant.state_dim, scenario.plant.input_dim);
}

SimConfig build_sim_config(const Scenario& scenario) {
    SimConfig cfg;
    cfg.grid_points = scenario.grid_points;
    if (!scenario.sim) {
        cfg.x0 = Vector::Zero(scenario.plant.state_dim);
        cfg.record_stride = 10;
        return cfg;
    }
    const SimDesc& sim = *scenario.sim;
    cfg.dt = sim.dt;
    cfg.t_final = sim.t_final;
    cfg.x0 = sim.x0;
    cfg.record_stride = sim.record_stride;
    if (sim.u_init) {
        const InitHistoryTable table = *sim.u_init;
        cfg.u_init = [table](double theta) -> Vector {
            auto it = std::upper_bound(table.thetas.begin(), table.thetas.end(), theta);
            if (it == table.thetas.begin()) return table.values.front();
            return table.values[std::size_t(it - table.thetas.begin()) - 1];
        };
    }
    return cfg;
}

bool is_single_delay(const Scenario& scenario) {
    return scenario.plant.discrete_taps.size() == 1 &&
           !scenario.plant.integral_kernel;
}

}  // namespace predfb
