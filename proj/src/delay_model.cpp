#include "predfb/delay_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace predfb {

namespace {

void validate_kernel(const IntegralKernel& kernel, int n, int r) {
    if (kernel.span < 0.0) {
        throw std::invalid_argument("delay system: kernel span must be nonnegative");
    }
    if (!kernel.values) {
        throw std::invalid_argument("delay system: kernel callable is empty");
    }
    for (double d : kernel.discontinuities) {
        if (d < -kernel.span - 1e-12 || d > 1e-12) {
            throw std::invalid_argument(
                "delay system: kernel discontinuity outside [-span, 0]");
        }
    }
    if (kernel.span > 0.0) {
        const Matrix probe = kernel.values(-0.5 * kernel.span);
        if (probe.rows() != n || probe.cols() != r) {
            throw std::invalid_argument("delay system: kernel value has wrong shape");
        }
    }
}

}  // namespace

DelaySystem::DelaySystem(Matrix a, int input_dim_, std::vector<DiscreteTap> taps,
                         std::optional<IntegralKernel> kernel, double horizon_)
    : state_dim(int(a.rows())),
      input_dim(input_dim_),
      a_matrix(std::move(a)),
      discrete_taps(std::move(taps)),
      integral_kernel(std::move(kernel)),
      horizon(horizon_) {
    if (state_dim < 1 || a_matrix.cols() != state_dim) {
        throw std::invalid_argument("delay system: A must be square and nonempty");
    }
    if (input_dim < 1) {
        throw std::invalid_argument("delay system: input dimension must be positive");
    }
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("delay system: horizon must be positive");
    }
    for (const auto& tap : discrete_taps) {
        if (tap.gain.rows() != state_dim || tap.gain.cols() != input_dim) {
            throw std::invalid_argument("delay system: tap gain has wrong shape");
        }
        if (tap.delay < 0.0) {
            throw std::invalid_argument("delay system: tap delay must be nonnegative");
        }
    }
    for (std::size_t i = 0; i < discrete_taps.size(); ++i) {
        for (std::size_t j = i + 1; j < discrete_taps.size(); ++j) {
            if (discrete_taps[i].delay == discrete_taps[j].delay) {
                throw std::invalid_argument(
                    "delay system: tap delays must be pairwise distinct");
            }
        }
    }
    if (integral_kernel) {
        validate_kernel(*integral_kernel, state_dim, input_dim);
    }
    if (max_delay() > horizon + 1e-12 * std::max(horizon, 1.0)) {
        throw std::invalid_argument(
            "delay system: horizon must cover every tap delay and the kernel span");
    }
}

double DelaySystem::max_delay() const {
    double m = 0.0;
    for (const auto& tap : discrete_taps) m = std::max(m, tap.delay);
    if (integral_kernel) m = std::max(m, integral_kernel->span);
    return m;
}

DelaySystem with_horizon(const DelaySystem& sys, double horizon) {
    return DelaySystem(sys.a_matrix, sys.input_dim, sys.discrete_taps,
                       sys.integral_kernel, horizon);
}

ControllerSpec::ControllerSpec(DelaySystem model_, Matrix gain_)
    : model(std::move(model_)), gain(std::move(gain_)) {
    if (gain.rows() != model.input_dim || gain.cols() != model.state_dim) {
        throw std::invalid_argument("controller: gain must be input_dim x state_dim");
    }
}

Matrix beta_eval(const DelaySystem& sys, double theta, int kernel_points) {
    const double h = sys.horizon;
    if (theta < -h - 1e-12 * std::max(h, 1.0) || theta > 1e-12 * std::max(h, 1.0)) {
        throw std::domain_error("beta_eval: theta outside [-h, 0]");
    }
    theta = std::clamp(theta, -h, 0.0);

    Matrix beta = Matrix::Zero(sys.state_dim, sys.input_dim);
    for (const auto& tap : sys.discrete_taps) {
        if (theta >= -tap.delay) beta += tap.gain;  // chi(0) = 1
    }

    if (sys.integral_kernel && sys.integral_kernel->span > 0.0) {
        const auto& kernel = *sys.integral_kernel;
        const double upper = std::max(theta, -kernel.span);
        if (upper > -kernel.span) {
            // composite trapezoid per continuity segment: right limits at
            // segment starts, left limits at segment ends
            std::vector<double> bounds{-kernel.span};
            for (double d : kernel.discontinuities) {
                if (d > -kernel.span && d < upper) bounds.push_back(d);
            }
            bounds.push_back(upper);
            std::sort(bounds.begin(), bounds.end());
            bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

            auto is_jump = [&kernel](double tau) {
                for (double d : kernel.discontinuities) {
                    if (std::abs(d - tau) <= 1e-12 * std::max(kernel.span, 1.0)) {
                        return true;
                    }
                }
                return false;
            };
            for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
                const double lo = bounds[s];
                const double hi = bounds[s + 1];
                const int cells = std::max(
                    1, int(std::lround(double(kernel_points - 1) * (hi - lo) /
                                       kernel.span)));
                const double step = (hi - lo) / cells;
                Matrix prev = kernel.values(lo);
                for (int c = 1; c <= cells; ++c) {
                    const double tau = (c == cells) ? hi : lo + c * step;
                    const Matrix cur = (c == cells && is_jump(hi))
                                           ? kernel_value_left(kernel, hi)
                                           : kernel.values(tau);
                    beta += 0.5 * step * (prev + cur);
                    prev = cur;
                }
            }
        }
    }
    return beta;
}

Matrix kernel_value_left(const IntegralKernel& kernel, double theta) {
    const double eps = 1e-9 * std::max(kernel.span, 1.0);
    return kernel.values(std::max(theta - eps, -kernel.span));
}

double shared_horizon(const DelaySystem& plant, const DelaySystem& model) {
    return std::max(plant.max_delay(), model.max_delay());
}

}  // namespace predfb
