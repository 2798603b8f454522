#include "featlab/train/loss.hpp"

#include <stdexcept>

namespace featlab::train {

using ad::Graph;
using ad::NodeId;
using ad::Op;

std::vector<NodeId> copy_subgraph(const Graph& src, std::span<const NodeId> roots, Graph& dst,
                                  const std::vector<std::pair<NodeId, NodeId>>& leaf_map) {
    std::int32_t max_root = -1;
    for (NodeId r : roots) max_root = std::max(max_root, r.idx);
    const std::int32_t n = max_root + 1;

    std::vector<char> needed(n, 0);
    for (NodeId r : roots) needed[r.idx] = 1;
    for (std::int32_t i = n - 1; i >= 0; --i) {
        if (!needed[i]) continue;
        const ad::Node& nd = src.node(NodeId{i});
        if (nd.a >= 0) needed[nd.a] = 1;
        if (nd.b >= 0) needed[nd.b] = 1;
    }

    std::vector<NodeId> map(n, NodeId{});
    for (const auto& [from, to] : leaf_map)
        if (from.idx < n) map[from.idx] = to;

    for (std::int32_t i = 0; i < n; ++i) {
        if (!needed[i] || map[i].valid()) continue;
        const ad::Node& nd = src.node(NodeId{i});
        NodeId a = nd.a >= 0 ? map[nd.a] : NodeId{};
        NodeId b = nd.b >= 0 ? map[nd.b] : NodeId{};
        switch (nd.op) {
            case Op::kConst: map[i] = dst.constant(nd.payload); break;
            case Op::kInput:
            case Op::kParam:
                throw std::invalid_argument("copy_subgraph: unmapped leaf");
            case Op::kAdd: map[i] = dst.add(a, b); break;
            case Op::kSub: map[i] = dst.sub(a, b); break;
            case Op::kMul: map[i] = dst.mul(a, b); break;
            case Op::kDiv: map[i] = dst.div(a, b); break;
            case Op::kNeg: map[i] = dst.neg(a); break;
            case Op::kPowInt: map[i] = dst.pow_int(a, static_cast<int>(nd.payload)); break;
            case Op::kPowReal: map[i] = dst.pow_real(a, nd.payload); break;
            case Op::kExp: map[i] = dst.exp(a); break;
            case Op::kLog: map[i] = dst.log(a); break;
            case Op::kSin: map[i] = dst.sin(a); break;
            case Op::kCos: map[i] = dst.cos(a); break;
            case Op::kTanh: map[i] = dst.tanh(a); break;
            case Op::kSqrt: map[i] = dst.sqrt(a); break;
            case Op::kAbs: map[i] = dst.abs(a); break;
            case Op::kMaxS: map[i] = dst.max_with(a, nd.payload); break;
        }
    }
    std::vector<NodeId> out;
    out.reserve(roots.size());
    for (NodeId r : roots) out.push_back(map[r.idx]);
    return out;
}

LossGraph build_loss(const pde::PdeProblem& prob, const net::NetworkSpec& spec,
                     const fm::FrozenState& frozen, const pde::SampleSet& samples,
                     const pde::Observations* data, const TrainConfig& cfg) {
    if (samples.n_interior() == 0) throw std::invalid_argument("build_loss: empty sample set");

    // symbolic template: one network forward + residual + constrained bc nodes
    Graph tmpl;
    std::vector<net::CoeffSpec> coeffs;
    for (const auto& c : prob.inverse_coeffs) coeffs.push_back({c.name, c.init_value});
    net::NetGraph ng = net::build_net_graph(spec, frozen, tmpl, coeffs);
    pde::Field field{&tmpl, ng.x, ng.outputs};
    std::vector<NodeId> res_nodes = prob.residual(field, ng.coeff_leaves, tmpl);

    std::vector<std::vector<NodeId>> bc_nodes(prob.bc_sets.size());
    for (std::size_t s = 0; s < prob.bc_sets.size(); ++s) {
        const auto& set = prob.bc_sets[s];
        for (int c : set.components)
            bc_nodes[s].push_back(set.kind == pde::BcKind::kTimeDerivative
                                      ? field.d(c, set.deriv_axis)
                                      : field.out(c));
    }

    LossGraph lg;
    lg.graph = std::make_unique<Graph>();
    Graph& g = *lg.graph;
    lg.param_leaves.resize(ng.param_leaves.size());
    for (auto& p : lg.param_leaves) p = g.param();

    std::vector<std::pair<NodeId, NodeId>> base_map;
    for (std::size_t i = 0; i < ng.param_leaves.size(); ++i)
        base_map.emplace_back(ng.param_leaves[i], lg.param_leaves[i]);

    const int n = prob.input_dim;
    auto instantiate = [&](std::span<const NodeId> roots, std::span<const double> pt) {
        auto map = base_map;
        for (int k = 0; k < n; ++k) map.emplace_back(ng.x[k], g.constant(pt[k]));
        return copy_subgraph(tmpl, roots, g, map);
    };

    // residual term
    NodeId res_sum = g.constant(0.0);
    const int nr = samples.n_interior();
    for (int i = 0; i < nr; ++i) {
        auto rs = instantiate(res_nodes,
                              std::span<const double>(samples.interior).subspan(
                                  static_cast<std::size_t>(i) * n, n));
        for (NodeId r : rs) res_sum = g.add(res_sum, g.square(r));
    }
    NodeId total = g.scale(cfg.lambda_r / nr, res_sum);

    // boundary terms, one mean per set
    for (std::size_t s = 0; s < prob.bc_sets.size(); ++s) {
        const auto& set = prob.bc_sets[s];
        const auto& pts = samples.boundary[s];
        const int nb = static_cast<int>(pts.size()) / n;
        if (nb == 0) throw std::invalid_argument("build_loss: empty bc sample set");
        NodeId bc_sum = g.constant(0.0);
        std::vector<double> tgt(set.components.size());
        for (int i = 0; i < nb; ++i) {
            auto pt = std::span<const double>(pts).subspan(static_cast<std::size_t>(i) * n, n);
            set.target(pt, tgt);
            auto vals = instantiate(bc_nodes[s], pt);
            for (std::size_t c = 0; c < vals.size(); ++c)
                bc_sum = g.add(bc_sum, g.square(g.sub(vals[c], g.constant(tgt[c]))));
        }
        total = g.add(total, g.scale(cfg.lambda_bc / nb, bc_sum));
    }

    // observation term
    if (data && data->size() > 0) {
        const int nd = data->size(), d = prob.output_dim;
        NodeId data_sum = g.constant(0.0);
        for (int i = 0; i < nd; ++i) {
            auto pt = std::span<const double>(data->x).subspan(static_cast<std::size_t>(i) * n, n);
            auto vals = instantiate(ng.outputs, pt);
            for (int c = 0; c < d; ++c) {
                NodeId diff = g.sub(vals[c], g.constant(data->u[static_cast<std::size_t>(i) * d + c]));
                data_sum = g.add(data_sum, g.square(diff));
            }
        }
        total = g.add(total, g.scale(cfg.lambda_data / nd, data_sum));
    }

    lg.total = total;
    return lg;
}

}  // namespace featlab::train
