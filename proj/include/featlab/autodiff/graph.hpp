#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace featlab::ad {

enum class Op : std::uint8_t {
    kConst,
    kInput,
    kParam,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kNeg,
    kPowInt,   // payload: integer exponent
    kPowReal,  // payload: real exponent
    kExp,
    kLog,
    kSin,
    kCos,
    kTanh,
    kSqrt,
    kAbs,
    kMaxS,  // max(x, payload)
};

struct NodeId {
    std::int32_t idx = -1;
    bool valid() const { return idx >= 0; }
    friend bool operator==(NodeId, NodeId) = default;
};

struct Node {
    Op op;
    std::int32_t a = -1;
    std::int32_t b = -1;
    double payload = 0.0;
};

// Scalar expression graph with reverse-mode differentiation. Differentiation
// is source-to-source: derive() appends new nodes expressing d(out)/d(wrt),
// so the result can be derived again (u_xx, then d/dtheta of a residual).
//
// Nodes are append-only and parents always precede children. Constants are
// deduplicated; other nodes are not (no CSE). Evaluation is a forward sweep
// over [0, n) into a value array, deterministic for fixed leaf values.
class Graph {
public:
    // leaves
    NodeId constant(double v);
    NodeId input();
    NodeId param();

    // primitives
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId div(NodeId a, NodeId b);
    NodeId neg(NodeId a);
    NodeId pow_int(NodeId a, int k);
    NodeId pow_real(NodeId a, double p);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);
    NodeId sin(NodeId a);
    NodeId cos(NodeId a);
    NodeId tanh(NodeId a);
    NodeId sqrt(NodeId a);
    NodeId abs(NodeId a);
    NodeId max_with(NodeId a, double c);

    // convenience over the primitives
    NodeId square(NodeId a) { return mul(a, a); }
    NodeId scale(double c, NodeId a) { return mul(constant(c), a); }
    NodeId add_const(NodeId a, double c) { return add(a, constant(c)); }

    // evaluation
    void set_value(NodeId leaf, double v);
    double value(NodeId n) const { return values_[n.idx]; }
    void eval();                 // full forward sweep
    double eval(NodeId n);       // sweep [0, n] and return value(n)

    // d(out)/d(wrt) as a new expression; wrt must be an input or param leaf.
    // Cached per (node, wrt): repeated calls share already-built derivatives.
    NodeId derive(NodeId out, NodeId wrt);

    // One reverse sweep over current values: d(out)/d(p) for every p in wrt.
    std::vector<double> grad_all(NodeId out, std::span<const NodeId> wrt);

    std::size_t size() const { return nodes_.size(); }
    const Node& node(NodeId n) const { return nodes_[n.idx]; }
    bool is_leaf(NodeId n) const {
        Op o = nodes_[n.idx].op;
        return o == Op::kInput || o == Op::kParam;
    }

private:
    NodeId push(Op op, std::int32_t a, std::int32_t b, double payload = 0.0);
    void check(NodeId n) const;
    bool is_const(NodeId n) const { return nodes_[n.idx].op == Op::kConst; }
    bool is_const(NodeId n, double v) const {
        return is_const(n) && nodes_[n.idx].payload == v;
    }
    NodeId derive_node(std::int32_t i, NodeId wrt, const std::vector<NodeId>& d);

    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::unordered_map<std::uint64_t, std::int32_t> const_ids_;
    // key: (node << 32) | wrt
    std::unordered_map<std::uint64_t, std::int32_t> deriv_cache_;
};

double eval_op(Op op, double a, double b, double payload);
// local partials d(node)/d(a), d(node)/d(b) at given operand values
void op_partials(Op op, double va, double vb, double payload, double self,
                 double& da, double& db);

}  // namespace featlab::ad
