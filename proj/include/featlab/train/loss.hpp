#pragma once

#include <memory>

#include "featlab/autodiff/graph.hpp"
#include "featlab/net/network.hpp"
#include "featlab/pde/problem.hpp"
#include "featlab/train/adam.hpp"

namespace featlab::train {

// Explicit composite loss as a single graph node:
//   (lambda_r / N_r) sum |residual|^2  +  per-set (lambda_bc / N_set) sum |mismatch|^2
//   [+ (lambda_data / N_d) sum |u - u_obs|^2]
// Every sample point is instantiated in the graph, so grad_all() and finite
// differences apply directly. Intended for tests and small sample sets; the
// trainer evaluates the same terms with the batched engine instead.
struct LossGraph {
    std::unique_ptr<ad::Graph> graph;
    ad::NodeId total;
    std::vector<ad::NodeId> param_leaves;  // 1:1 with ParamStore values
    void set_params(std::span<const double> v) {
        for (std::size_t i = 0; i < param_leaves.size(); ++i)
            graph->set_value(param_leaves[i], v[i]);
    }
    double eval() { return graph->eval(total); }
};

LossGraph build_loss(const pde::PdeProblem& prob, const net::NetworkSpec& spec,
                     const fm::FrozenState& frozen, const pde::SampleSet& samples,
                     const pde::Observations* data, const TrainConfig& cfg);

// copy the subtrees under `roots` into dst, substituting mapped leaves
std::vector<ad::NodeId> copy_subgraph(const ad::Graph& src, std::span<const ad::NodeId> roots,
                                      ad::Graph& dst,
                                      const std::vector<std::pair<ad::NodeId, ad::NodeId>>& leaf_map);

}  // namespace featlab::train
