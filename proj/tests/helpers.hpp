#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "predfb/certificate.hpp"
#include "predfb/delay_model.hpp"

namespace predfb::testing {

/// splitmix64-based generator so random suites are identical across
/// platforms (the standard distributions are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() {  // [0, 1)
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive
        return lo + int(next_u64() % std::uint64_t(hi - lo + 1));
    }

    Matrix matrix(int rows, int cols, double lo, double hi) {
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                m(i, j) = uniform(lo, hi);
            }
        }
        return m;
    }

private:
    std::uint64_t state_;
};

/// Scalar integrator benchmark system: A = 0, one unit tap at delay 1,
/// horizon 1, gain F = -1, weights W' = 1, W'' = 1/2. Every certificate
/// constant has a closed form for it.
inline DelaySystem make_s1_plant(double horizon = 1.0) {
    Matrix a = Matrix::Zero(1, 1);
    Matrix b = Matrix::Ones(1, 1);
    return DelaySystem(a, 1, {{b, 1.0}}, std::nullopt, horizon);
}

inline ControllerSpec make_s1_controller(double delta_hat, double horizon) {
    Matrix a = Matrix::Zero(1, 1);
    Matrix b = Matrix::Ones(1, 1);
    DelaySystem model(a, 1, {{b, delta_hat}}, std::nullopt, horizon);
    Matrix f = -Matrix::Ones(1, 1);
    return ControllerSpec(std::move(model), std::move(f));
}

inline WeightChoice make_s1_weights() {
    return {Matrix::Ones(1, 1), 0.5 * Matrix::Ones(1, 1)};
}

/// Random mixed-delay plant with a stabilizing gain, shaped like the
/// problems the certificate is meant for: the leading tap has unit norm and
/// the closed loop keeps a real stability margin.
struct RandomCase {
    DelaySystem plant;
    ControllerSpec controller;
    WeightChoice weights;
};

inline RandomCase random_mixed_case(Rng& rng) {
    for (;;) {
        const int n = rng.uniform_int(1, 4);
        const int r = rng.uniform_int(1, 2);

        Matrix a_raw = rng.matrix(n, n, -1.0, 1.0);
        // shift to a Hurwitz base so the feedback search below converges
        const double margin = rng.uniform(0.2, 0.8);
        Matrix a = a_raw - (spectral_abscissa(a_raw) + margin) *
                               Matrix::Identity(n, n);

        std::vector<DiscreteTap> taps;
        Matrix b1 = rng.matrix(n, r, -1.0, 1.0);
        const double nb1 = spectral_norm(b1);
        if (nb1 < 1e-6) continue;
        b1 /= nb1;  // unit actuation scale
        // leading delay >= 1 keeps h * max ||Q||^2 >= 1, so the quadratic
        // upper bound constant covers the whole state/history space
        const double d1 = rng.uniform(1.0, 1.4);
        taps.push_back({b1, d1});
        double horizon = d1;
        if (rng.uniform() < 0.5) {
            Matrix b2 = rng.matrix(n, r, -1.0, 1.0);
            const double nb2 = spectral_norm(b2);
            if (nb2 > 1e-6) {
                b2 *= rng.uniform(0.2, 0.5) / nb2;
                const double d2 = rng.uniform(0.05, 0.95);
                taps.push_back({b2, d2});
            }
        }

        std::optional<IntegralKernel> kernel;
        if (rng.uniform() < 0.5) {
            const double span = rng.uniform(0.3, std::min(1.0, horizon));
            const Matrix k0 = rng.matrix(n, r, -0.5, 0.5);
            const Matrix k1 = rng.matrix(n, r, -0.5, 0.5);
            kernel = IntegralKernel{
                span,
                [k0, k1](double theta) -> Matrix {
                    return k0 + std::sin(2.0 * theta) * k1;
                },
                {}};
        }

        DelaySystem plant(a, r, taps, kernel, horizon);
        const QuadratureGrid grid = make_system_grid(plant, 401);
        const Matrix q0 = q_at_zero(compute_kernel(plant, grid));

        // rejection-sample a gain that leaves a visible stability margin
        for (int attempt = 0; attempt < 12; ++attempt) {
            Matrix f = rng.matrix(r, n, -0.5, 0.5);
            const double abscissa = spectral_abscissa(a + q0 * f);
            if (abscissa < -0.05 && abscissa > -5.0) {
                return RandomCase{plant, ControllerSpec(plant, f),
                                  default_weights(n, r)};
            }
        }
    }
}

/// Mismatched controller model: the plant with matrices and delays nudged by
/// the given scale, re-declared over the common horizon together with the
/// plant copy it is paired with.
inline RandomCase perturb_model(Rng& rng, const RandomCase& base, double scale) {
    const DelaySystem& plant = base.plant;
    const int n = plant.state_dim;
    const int r = plant.input_dim;

    Matrix a_hat = plant.a_matrix + scale * rng.matrix(n, n, -1.0, 1.0);
    std::vector<DiscreteTap> taps;
    for (const auto& tap : plant.discrete_taps) {
        DiscreteTap t;
        t.gain = tap.gain + scale * rng.matrix(n, r, -1.0, 1.0);
        t.delay = std::max(0.0, tap.delay + scale * rng.uniform(-1.0, 1.0));
        taps.push_back(std::move(t));
    }
    std::optional<IntegralKernel> kernel = plant.integral_kernel;
    if (kernel) {
        const Matrix shift = scale * rng.matrix(n, r, -1.0, 1.0);
        auto inner = kernel->values;
        kernel->values = [inner, shift](double theta) -> Matrix {
            return inner(theta) + shift;
        };
    }

    double h = plant.max_delay();
    for (const auto& tap : taps) h = std::max(h, tap.delay);
    DelaySystem model(a_hat, r, std::move(taps), std::move(kernel), h);
    return RandomCase{with_horizon(plant, h),
                      ControllerSpec(std::move(model), base.controller.gain),
                      base.weights};
}

}  // namespace predfb::testing
