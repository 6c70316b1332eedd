#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "predfb/errors.hpp"
#include "predfb/simulator.hpp"

using namespace predfb;
using predfb::testing::Rng;

namespace {

SimConfig s1_config(double dt, double t_final, double x0, int grid_points,
                    int stride = 1) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.t_final = t_final;
    cfg.x0 = x0 * Vector::Ones(1);
    cfg.record_stride = stride;
    cfg.grid_points = grid_points;
    return cfg;
}

}  // namespace

TEST_CASE("control output closed forms") {
    const DelaySystem sys = testing::make_s1_plant();
    const QuadratureGrid grid = make_system_grid(sys, 201);
    const KernelGrid q_hat = compute_kernel(sys, grid);
    const Matrix f = -Matrix::Ones(1, 1);

    Vector x(1);
    x << 2.0;
    CHECK(control_output(x, ZeroHistory(1), q_hat, f)(0) ==
          doctest::Approx(-2.0).epsilon(1e-12));

    x << 0.0;
    CHECK(control_output(x, ConstantHistory(Vector::Ones(1)), q_hat, f)(0) ==
          doctest::Approx(-1.0).epsilon(1e-12));

    CHECK(control_output(x, ConstantHistory(Vector::Ones(1)), q_hat,
                         Matrix::Zero(1, 1))(0) == doctest::Approx(0.0));
}

TEST_CASE("plant right-hand side closed forms") {
    Matrix a(2, 2);
    a << -0.5, 1.0, 0.0, -0.25;
    DelaySystem linear(a, 1, {{Matrix::Zero(2, 1), 0.5}}, std::nullopt, 1.0);
    Vector x(2);
    x << 1.0, 2.0;
    CHECK((plant_rhs(x, ZeroHistory(1), linear) - a * x).norm() < 1e-14);

    const DelaySystem s1 = testing::make_s1_plant();
    Vector x1(1);
    x1 << 0.0;
    CHECK(plant_rhs(x1, ConstantHistory(Vector::Ones(1)), s1)(0) ==
          doctest::Approx(1.0));

    Matrix a0 = Matrix::Zero(1, 1);
    DelaySystem kernel_only(
        a0, 1, {},
        IntegralKernel{1.0, [](double) { return Matrix::Ones(1, 1); }, {}}, 1.0);
    CHECK(plant_rhs(x1, ConstantHistory(Vector::Ones(1)), kernel_only)(0) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nominal scalar loop reproduces its closed-form solution") {
    const DelaySystem plant = testing::make_s1_plant();
    const ControllerSpec controller = testing::make_s1_controller(1.0, 1.0);
    const Trajectory traj =
        simulate(plant, controller, s1_config(2e-3, 2.2, 1.0, 1001, 5));

    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        const double expected = (t <= 1.0) ? 1.0 : std::exp(1.0 - t);
        CHECK(std::abs(traj.x_samples[k](0) - expected) < 2e-3);
    }
    // exact prediction makes u track the reduced state: u = F y
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        CHECK(std::abs(traj.u_samples[k](0) + traj.y_samples[k](0)) < 1e-5);
    }
}

TEST_CASE("nonzero initial history enters the loop correctly") {
    const DelaySystem plant = testing::make_s1_plant();
    const ControllerSpec controller = testing::make_s1_controller(1.0, 1.0);
    SimConfig cfg = s1_config(2e-3, 2.0, 0.0, 1001, 5);
    cfg.u_init = [](double) { return Vector::Ones(1); };

    const Trajectory traj = simulate(plant, controller, cfg);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        const double expected = (t <= 1.0) ? t : std::exp(1.0 - t);
        CHECK(std::abs(traj.x_samples[k](0) - expected) < 2e-3);
    }
}

TEST_CASE("open loop with zero gain follows the matrix exponential") {
    Matrix a(2, 2);
    a << -0.8, 0.5, -0.3, -1.1;
    Matrix b(2, 1);
    b << 1.0, 0.5;
    DelaySystem plant(a, 1, {{b, 0.6}}, std::nullopt, 0.6);
    ControllerSpec controller(plant, Matrix::Zero(1, 2));

    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 2.0;
    cfg.x0 = Vector(2);
    cfg.x0 << 1.0, -0.5;
    cfg.record_stride = 100;
    cfg.grid_points = 601;

    const Trajectory traj = simulate(plant, controller, cfg);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const Vector expected = expm(a * traj.times[k]) * cfg.x0;
        CHECK((traj.x_samples[k] - expected).norm() < 1e-6);
    }
}

TEST_CASE("functional evaluation closed forms") {
    const DelaySystem plant = testing::make_s1_plant();
    const KernelGrid q = compute_kernel(plant, make_system_grid(plant, 2001));
    const Matrix v = Matrix::Ones(1, 1);
    const Matrix w2 = 0.5 * Matrix::Ones(1, 1);

    Vector x(1);
    x << 1.0;
    CHECK(evaluate_functional(x, ZeroHistory(1), q, v, w2, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-12));

    x << 0.0;
    const double expected = 1.0 + 0.5 * (1.0 - std::exp(-1.0));
    CHECK(evaluate_functional(x, ConstantHistory(Vector::Ones(1)), q, v, w2, 1.0) ==
          doctest::Approx(expected).epsilon(1e-7));

    CHECK(evaluate_functional(x, ZeroHistory(1), q, v, w2, 1.0) ==
          doctest::Approx(0.0));
}

TEST_CASE("certified mismatch satisfies the decay envelopes") {
    const DelaySystem plant = testing::make_s1_plant();
    const ControllerSpec controller = testing::make_s1_controller(0.98, 1.0);
    const WeightChoice weights = testing::make_s1_weights();
    const auto cert = certify(plant, controller, weights);
    REQUIRE(cert.certified);

    SimConfig cfg = s1_config(2e-3, 8.0, 1.0, 1001, 10);
    const Trajectory traj = simulate(plant, controller, cfg, &cert, &weights);
    const auto rep = verify_envelope(traj, cert, 1.0, 0.0);
    CHECK_FALSE(rep.vacuous);
    CHECK(rep.max_v_ratio <= 1.01);
    CHECK(rep.max_x_ratio <= 1.01);
    CHECK(rep.max_u_ratio <= 1.01);
}

TEST_CASE("exact model decays at the nominal functional rate") {
    const DelaySystem plant = testing::make_s1_plant();
    const ControllerSpec controller = testing::make_s1_controller(1.0, 1.0);
    const WeightChoice weights = testing::make_s1_weights();
    const auto cert = certify(plant, controller, weights);

    SimConfig cfg = s1_config(2e-3, 6.0, 1.0, 1001, 10);
    const Trajectory traj = simulate(plant, controller, cfg, &cert, &weights);
    const auto rep = verify_envelope(traj, cert, 1.0, 0.0);
    CHECK(rep.max_v_ratio <= 1.01);  // sigma_hat = sigma here
}

TEST_CASE("zero initial data is vacuously inside every envelope") {
    const DelaySystem plant = testing::make_s1_plant();
    const ControllerSpec controller = testing::make_s1_controller(1.0, 1.0);
    const WeightChoice weights = testing::make_s1_weights();
    const auto cert = certify(plant, controller, weights);

    SimConfig cfg = s1_config(2e-3, 1.0, 0.0, 801, 10);
    const Trajectory traj = simulate(plant, controller, cfg, &cert, &weights);
    const auto rep = verify_envelope(traj, cert, 0.0, 0.0);
    CHECK(rep.vacuous);
    CHECK(rep.max_v_ratio == doctest::Approx(0.0));
}

TEST_CASE("verify_envelope needs functional samples") {
    Trajectory empty;
    RobustnessCertificate cert{};
    CHECK_THROWS_AS(verify_envelope(empty, cert, 1.0, 0.0), std::domain_error);
}

TEST_CASE("destabilizing gain triggers the divergence guard") {
    const DelaySystem plant = testing::make_s1_plant();
    DelaySystem model = plant;
    ControllerSpec controller(model, 5.0 * Matrix::Ones(1, 1));

    SimConfig cfg = s1_config(2e-3, 12.0, 1.0, 801, 50);
    bool thrown = false;
    try {
        simulate(plant, controller, cfg);
    } catch (const DivergenceError& e) {
        thrown = true;
        CHECK(e.time() > 0.0);
        CHECK(e.time() < 12.0);
    }
    CHECK(thrown);
}

TEST_CASE("identical inputs produce bit-identical trajectories") {
    const DelaySystem plant = testing::make_s1_plant();
    const ControllerSpec controller = testing::make_s1_controller(0.98, 1.0);
    const SimConfig cfg = s1_config(2e-3, 1.5, 1.0, 801, 7);

    const Trajectory t1 = simulate(plant, controller, cfg);
    const Trajectory t2 = simulate(plant, controller, cfg);
    REQUIRE(t1.times.size() == t2.times.size());
    for (std::size_t k = 0; k < t1.times.size(); ++k) {
        CHECK(t1.times[k] == t2.times[k]);
        CHECK(t1.x_samples[k](0) == t2.x_samples[k](0));
        CHECK(t1.u_samples[k](0) == t2.u_samples[k](0));
        CHECK(t1.y_samples[k](0) == t2.y_samples[k](0));
        CHECK(t1.u_hist_l2[k] == t2.u_hist_l2[k]);
    }
}

TEST_CASE("reduced state obeys the delay-free dynamics along the run") {
    const DelaySystem plant = testing::make_s1_plant();
    const ControllerSpec controller = testing::make_s1_controller(1.0, 1.0);
    const double dt = 2e-3;
    const Trajectory traj =
        simulate(plant, controller, s1_config(dt, 2.0, 1.0, 1001, 1));

    // A = 0 and Q(0) = 1: finite differences of y must track u
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
        const double fd = (traj.y_samples[k + 1](0) - traj.y_samples[k](0)) / dt;
        const double rhs = 0.5 * (traj.u_samples[k](0) + traj.u_samples[k + 1](0));
        worst = std::max(worst, std::abs(fd - rhs));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("late-time decay approaches the closed-loop spectral abscissa") {
    Matrix a(1, 1), b(1, 1);
    a << -0.2;
    b << 1.0;
    const double delta = 0.8;
    DelaySystem plant(a, 1, {{b, delta}}, std::nullopt, delta);
    const double q0 = std::exp(0.2 * delta);
    Matrix f(1, 1);
    f << (-0.9 + 0.2) / q0;  // place the loop pole at -0.9
    ControllerSpec controller(plant, f);

    SimConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_final = 10.0;
    cfg.x0 = Vector::Ones(1);
    cfg.record_stride = 20;
    cfg.grid_points = 801;

    const Trajectory traj = simulate(plant, controller, cfg);
    double t1 = 0.0, t2 = 0.0, v1 = 0.0, v2 = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        if (traj.times[k] <= 6.0) {
            t1 = traj.times[k];
            v1 = traj.x_samples[k].norm();
        }
        t2 = traj.times[k];
        v2 = traj.x_samples[k].norm();
    }
    const double slope = (std::log(v2) - std::log(v1)) / (t2 - t1);
    CHECK(std::abs(slope - (-0.9)) < 0.045);  // within 5 percent
}

TEST_CASE("halving the step reduces the closed-form error at second order") {
    const DelaySystem plant = testing::make_s1_plant();
    const ControllerSpec controller = testing::make_s1_controller(1.0, 1.0);

    auto error_at_2 = [&](double dt, int grid_points) {
        const Trajectory traj =
            simulate(plant, controller, s1_config(dt, 2.0, 1.0, grid_points, 1));
        return std::abs(traj.x_samples.back()(0) - std::exp(-1.0));
    };
    const double coarse = error_at_2(4e-3, 501);
    const double fine = error_at_2(2e-3, 1001);
    CHECK(coarse / fine >= std::pow(2.0, 1.8));
}

TEST_CASE("simulate validates its configuration") {
    const DelaySystem plant = testing::make_s1_plant();
    const ControllerSpec controller = testing::make_s1_controller(1.0, 1.0);

    SimConfig bad_dt = s1_config(0.2, 1.0, 1.0, 401);  // dt > h/10
    CHECK_THROWS_AS(simulate(plant, controller, bad_dt), std::invalid_argument);

    SimConfig bad_t = s1_config(1e-2, 1e-3, 1.0, 401);  // t_final < dt
    CHECK_THROWS_AS(simulate(plant, controller, bad_t), std::invalid_argument);

    SimConfig bad_x0 = s1_config(1e-2, 1.0, 1.0, 401);
    bad_x0.x0 = Vector::Ones(2);
    CHECK_THROWS_AS(simulate(plant, controller, bad_x0), std::invalid_argument);
}
