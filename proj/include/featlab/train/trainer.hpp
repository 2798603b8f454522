#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "featlab/net/network.hpp"
#include "featlab/pde/problem.hpp"
#include "featlab/train/adam.hpp"

namespace featlab::train {

struct TrainTrace {
    std::vector<std::string> coeff_names;
    struct Row {
        int iter;
        double total, res, bc, data;
        std::vector<double> coeffs;
        double wall_s;
    };
    std::vector<Row> rows;
    void to_csv(const std::filesystem::path& path) const;
};

struct FitResult {
    net::ParamStore params;
    TrainTrace trace;
    double final_loss = 0.0;
};

// Full-batch Adam on the composite loss. Deterministic for a fixed config:
// samples, init and any resampling all derive from cfg.seed. Observations are
// required exactly when the problem is inverse. Throws NumericalAbort when a
// loss or gradient goes non-finite.
FitResult fit(const pde::PdeProblem& prob, const net::NetworkSpec& spec, const TrainConfig& cfg,
              const pde::SampleCounts& counts, const pde::Observations* data = nullptr);

}  // namespace featlab::train
