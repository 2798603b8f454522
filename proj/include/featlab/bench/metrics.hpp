#pragma once

#include <optional>
#include <stdexcept>

#include "featlab/net/network.hpp"
#include "featlab/pde/problem.hpp"

namespace featlab::bench {

struct MetricUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fixed evaluation grid: 1024 points for 1-D inputs, 256^2 for 2-D, and a
// seeded 1e5-point Monte Carlo set for 3-D and up. Holes are skipped.
std::vector<double> eval_grid(const pde::PdeProblem& prob);

// ||u_pred - u_ref||_2 / ||u_ref||_2 over the fixed grid, output components
// flattened. Throws MetricUnavailable when the problem has no reference.
double rel_l2(const pde::PdeProblem& prob, const net::NetworkSpec& spec,
              const net::ParamStore& store, std::uint64_t seed);

struct ResidualStats {
    double residual_mse = 0.0;
    double bc_mse = 0.0;
};

// Residual and boundary-mismatch MSE on a fresh fixed-seed sample set;
// the report path for problems without reference data.
ResidualStats residual_bc_mse(const pde::PdeProblem& prob, const net::NetworkSpec& spec,
                              const net::ParamStore& store, std::uint64_t seed,
                              int n_interior = 4096, int n_bc = 512);

// network outputs at arbitrary points (row-major), using the stored params
std::vector<double> predict(const pde::PdeProblem& prob, const net::NetworkSpec& spec,
                            const net::ParamStore& store, std::uint64_t seed,
                            std::span<const double> pts, int npts);

}  // namespace featlab::bench
