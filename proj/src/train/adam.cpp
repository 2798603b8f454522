#include "featlab/train/adam.hpp"

#include <cmath>
#include <string>

namespace featlab::train {

void adam_step(std::span<double> params, std::span<const double> grads, const TrainConfig& cfg,
               AdamState& state, std::size_t coeff_offset) {
    const std::size_t n = params.size();
    if (grads.size() != n) throw std::invalid_argument("adam_step: size mismatch");
    if (state.m.empty()) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < n; ++i) {
        double g = grads[i];
        if (!std::isfinite(g))
            throw NumericalAbort("adam_step: non-finite gradient at parameter " + std::to_string(i));
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        double mhat = state.m[i] / c1;
        double vhat = state.v[i] / c2;
        double lr = i >= coeff_offset ? cfg.lr * cfg.coeff_lr_scale : cfg.lr;
        params[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

}  // namespace featlab::train
