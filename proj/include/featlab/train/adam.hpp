#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace featlab::train {

struct TrainConfig {
    int iterations = 20000;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lambda_r = 1.0;
    double lambda_bc = 1.0;
    double lambda_data = 1.0;
    int resample_every = 0;  // 0 = fixed interior set
    std::uint64_t seed = 0;
    int log_every = 500;
    // lr multiplier for the inverse-coefficient slices (their scale is far
    // from the O(1e-1) network weights)
    double coeff_lr_scale = 1.0;
};

// raised when a loss or gradient goes non-finite
struct NumericalAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
};

// Standard Adam with bias correction. Entries at index >= coeff_offset are
// treated as the coefficient group and stepped with lr * coeff_lr_scale.
void adam_step(std::span<double> params, std::span<const double> grads, const TrainConfig& cfg,
               AdamState& state, std::size_t coeff_offset = static_cast<std::size_t>(-1));

}  // namespace featlab::train
