#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "featlab/autodiff/graph.hpp"
#include "featlab/featmap/feature_map.hpp"

namespace featlab::net {

struct NetworkSpec {
    int input_dim = 2;
    fm::FeatureMapSpec feature_map;
    std::vector<int> hidden = {50, 50, 50, 50};  // tanh layers; may be empty
    int output_dim = 1;
};

struct Slice {
    std::string name;
    std::size_t offset = 0;
    std::size_t len = 0;
};

// Flat array of every trainable value, with named disjoint slices covering it.
class ParamStore {
public:
    ParamStore() = default;
    explicit ParamStore(std::vector<Slice> slices);

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    const std::vector<Slice>& slices() const { return slices_; }
    bool has(const std::string& name) const;
    std::span<double> slice(const std::string& name);
    std::span<const double> slice(const std::string& name) const;

private:
    std::vector<double> values_;
    std::vector<Slice> slices_;
};

struct ParamCounts {
    std::size_t trainable = 0;
    std::size_t frozen = 0;
};

// named inverse coefficients appended to the store after network slices
struct CoeffSpec {
    std::string name;
    double init_value = 1.0;
};

ParamCounts param_count(const NetworkSpec& spec);
std::vector<Slice> param_layout(const NetworkSpec& spec, std::span<const CoeffSpec> coeffs = {});

// feature-map spec with its init seed derived from the run seed
fm::FeatureMapSpec seeded_feature_map(const NetworkSpec& spec, std::uint64_t seed);

// Glorot-uniform affine weights, zero biases, feature map state from its own
// seeded init; deterministic per seed.
ParamStore init_params(const NetworkSpec& spec, std::uint64_t seed,
                       std::span<const CoeffSpec> coeffs = {});

// Symbolic forward pass: input leaves, one param leaf per trainable value (in
// store order), feature layer, tanh stack, affine head.
struct NetGraph {
    ad::Graph* graph = nullptr;
    std::vector<ad::NodeId> x;             // input leaves
    std::vector<ad::NodeId> param_leaves;  // 1:1 with ParamStore values
    std::vector<ad::NodeId> outputs;
    std::vector<ad::NodeId> coeff_leaves;  // leaves of the coeff slices, if any

    ad::NodeId out(int c) const { return outputs[c]; }
    ad::NodeId d(int c, int axis) { return graph->derive(outputs[c], x[axis]); }
    ad::NodeId d2(int c, int a1, int a2) { return graph->derive(d(c, a1), x[a2]); }
};

NetGraph build_net_graph(const NetworkSpec& spec, const fm::FrozenState& frozen, ad::Graph& g,
                         std::span<const CoeffSpec> coeffs = {});

}  // namespace featlab::net
