#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "predfb/matrix_ops.hpp"

using namespace predfb;
using predfb::testing::Rng;

TEST_CASE("expm matches closed forms") {
    CHECK((expm(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).norm() ==
          doctest::Approx(0.0).epsilon(1e-14));

    Matrix nilpotent(2, 2);
    nilpotent << 0, 1, 0, 0;
    Matrix expected(2, 2);
    expected << 1, 1, 0, 1;
    CHECK((expm(nilpotent) - expected).norm() < 1e-14);

    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = -1.0;
    diag(1, 1) = -2.0;
    const Matrix e = expm(diag);
    CHECK(e(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(std::abs(e(0, 1)) < 1e-15);
}

TEST_CASE("expm(A) expm(-A) is the identity for random A") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rng.uniform_int(1, 5);
        Matrix a = rng.matrix(n, n, -1.0, 1.0);
        const double norm = spectral_norm(a);
        if (norm > 0.0) a *= rng.uniform(0.1, 5.0) / norm;
        const Matrix prod = expm(a) * expm(-a);
        CHECK((prod - Matrix::Identity(n, n)).norm() < 1e-10);
    }
}

TEST_CASE("expm rejects non-square input") {
    CHECK_THROWS_AS(expm(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("solve_lyapunov on scalar and diagonal cases") {
    Matrix a(1, 1), w(1, 1);
    a << -1.0;
    w << 2.0;
    CHECK(solve_lyapunov(a, w)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    w << 1.0;
    CHECK(solve_lyapunov(a, w)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

    Matrix a2 = Matrix::Zero(2, 2);
    a2(0, 0) = -1.0;
    a2(1, 1) = -2.0;
    const Matrix v = solve_lyapunov(a2, Matrix::Identity(2, 2));
    CHECK(v(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(v(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(v(0, 1)) < 1e-14);
}

TEST_CASE("solve_lyapunov residual and definiteness on random Hurwitz matrices") {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = rng.uniform_int(1, 10);
        Matrix raw = rng.matrix(n, n, -1.0, 1.0);
        const Matrix a =
            raw - (spectral_abscissa(raw) + rng.uniform(0.1, 1.0)) *
                      Matrix::Identity(n, n);
        Matrix c = rng.matrix(n, n, -1.0, 1.0);
        const Matrix w =
            c * c.transpose() + 0.1 * Matrix::Identity(n, n);

        const Matrix v = solve_lyapunov(a, w);
        const double residual = (a.transpose() * v + v * a + w).norm();
        CHECK(residual <= 1e-8 * w.norm());
        CHECK(sym_eig_extremes(v).first > 0.0);
    }
}

TEST_CASE("sym_eig_extremes on simple matrices") {
    const auto [id_lo, id_hi] = sym_eig_extremes(Matrix::Identity(3, 3));
    CHECK(id_lo == doctest::Approx(1.0));
    CHECK(id_hi == doctest::Approx(1.0));

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 0.25;
    d(1, 1) = 0.5;
    const auto [d_lo, d_hi] = sym_eig_extremes(d);
    CHECK(d_lo == doctest::Approx(0.25));
    CHECK(d_hi == doctest::Approx(0.5));

    Matrix s(2, 2);
    s << 2, 1, 1, 2;
    const auto [s_lo, s_hi] = sym_eig_extremes(s);
    CHECK(s_lo == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s_hi == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sym_eig_extremes rejects asymmetric input") {
    Matrix m(2, 2);
    m << 0, 1, 0, 0;
    CHECK_THROWS_AS(sym_eig_extremes(m), std::domain_error);
}

TEST_CASE("spectral norm basics and Frobenius dominance") {
    CHECK(spectral_norm(Matrix::Identity(4, 4)) == doctest::Approx(1.0));
    CHECK(spectral_norm(3.0 * Matrix::Identity(2, 2)) == doctest::Approx(3.0));

    Matrix nilpotent(2, 2);
    nilpotent << 0, 1, 0, 0;
    CHECK(spectral_norm(nilpotent) == doctest::Approx(1.0));

    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = rng.matrix(rng.uniform_int(1, 5), rng.uniform_int(1, 5),
                                    -2.0, 2.0);
        CHECK(spectral_norm(m) <= m.norm() + 1e-12);
        CHECK(matrix_norm(m, NormKind::Frobenius) == doctest::Approx(m.norm()));
    }
}

TEST_CASE("spectral abscissa") {
    CHECK(spectral_abscissa(-Matrix::Identity(3, 3)) == doctest::Approx(-1.0));

    Matrix rot(2, 2);
    rot << 0, 1, -1, 0;
    CHECK(spectral_abscissa(rot) == doctest::Approx(0.0).epsilon(1e-12));

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = -1.0;
    d(1, 1) = -3.0;
    CHECK(spectral_abscissa(d) == doctest::Approx(-1.0));
}

TEST_CASE("quadrature grid construction honors splits") {
    const QuadratureGrid grid = make_quadrature_grid(1.0, 101, {-0.3117, -0.98});
    CHECK(grid.points.front() == doctest::Approx(-1.0));
    CHECK(grid.points.back() == doctest::Approx(0.0));
    for (std::size_t j = 1; j < grid.points.size(); ++j) {
        CHECK(grid.points[j] > grid.points[j - 1]);
    }
    for (double s : grid.split_points) {
        bool found = false;
        for (double p : grid.points) {
            if (p == s) found = true;
        }
        CHECK(found);
    }
    CHECK(grid.split_points.size() == 2);
    CHECK(grid.split_points[0] == doctest::Approx(-0.98).epsilon(1e-12));
}

TEST_CASE("trapezoid integration on exact cases") {
    const QuadratureGrid grid = make_quadrature_grid(1.0, 101);
    std::vector<double> ones(grid.size(), 1.0);
    CHECK(trapezoid_integrate(grid, ones) == doctest::Approx(1.0).epsilon(1e-14));

    std::vector<double> ramp(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) ramp[j] = grid.points[j];
    CHECK(trapezoid_integrate(grid, ramp) == doctest::Approx(-0.5).epsilon(1e-13));

    std::vector<double> zeros(grid.size(), 0.0);
    CHECK(trapezoid_integrate(grid, zeros) == doctest::Approx(0.0));
}

TEST_CASE("trapezoid converges at second order on smooth integrands") {
    auto integral_error = [](int points) {
        const QuadratureGrid grid = make_quadrature_grid(1.0, points);
        std::vector<double> samples(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            samples[j] = std::exp(grid.points[j]);
        }
        return std::abs(trapezoid_integrate(grid, samples) - (1.0 - std::exp(-1.0)));
    };
    const double coarse = integral_error(51);
    const double fine = integral_error(101);
    CHECK(coarse / fine > 3.5);  // ~4 for an order-2 rule
}

TEST_CASE("trapezoid rejects mismatched sample counts") {
    const QuadratureGrid grid = make_quadrature_grid(1.0, 11);
    std::vector<double> bad(grid.size() + 1, 1.0);
    CHECK_THROWS_AS(trapezoid_integrate(grid, bad), std::invalid_argument);
}
