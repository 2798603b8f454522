#include "featlab/autodiff/graph.hpp"

#include <bit>
#include <cfloat>
#include <cmath>
#include <stdexcept>

namespace featlab::ad {

NodeId Graph::push(Op op, std::int32_t a, std::int32_t b, double payload) {
    nodes_.push_back(Node{op, a, b, payload});
    values_.push_back(0.0);
    return NodeId{static_cast<std::int32_t>(nodes_.size() - 1)};
}

void Graph::check(NodeId n) const {
    if (n.idx < 0 || n.idx >= static_cast<std::int32_t>(nodes_.size()))
        throw std::invalid_argument("autodiff: invalid parent node id");
}

NodeId Graph::constant(double v) {
    auto key = std::bit_cast<std::uint64_t>(v);
    auto it = const_ids_.find(key);
    if (it != const_ids_.end()) return NodeId{it->second};
    NodeId id = push(Op::kConst, -1, -1, v);
    values_[id.idx] = v;
    const_ids_.emplace(key, id.idx);
    return id;
}

NodeId Graph::input() { return push(Op::kInput, -1, -1); }
NodeId Graph::param() { return push(Op::kParam, -1, -1); }

// Builders fold constants and drop arithmetic identities. This keeps the
// graphs derive() produces small: derivative seeds are 0/1 constants and most
// of them vanish here.

NodeId Graph::add(NodeId a, NodeId b) {
    check(a); check(b);
    if (is_const(a) && is_const(b)) return constant(values_[a.idx] + values_[b.idx]);
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return push(Op::kAdd, a.idx, b.idx);
}

NodeId Graph::sub(NodeId a, NodeId b) {
    check(a); check(b);
    if (is_const(a) && is_const(b)) return constant(values_[a.idx] - values_[b.idx]);
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return neg(b);
    if (a == b) return constant(0.0);
    return push(Op::kSub, a.idx, b.idx);
}

NodeId Graph::mul(NodeId a, NodeId b) {
    check(a); check(b);
    if (is_const(a) && is_const(b)) return constant(values_[a.idx] * values_[b.idx]);
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return push(Op::kMul, a.idx, b.idx);
}

NodeId Graph::div(NodeId a, NodeId b) {
    check(a); check(b);
    if (is_const(a) && is_const(b)) return constant(values_[a.idx] / values_[b.idx]);
    if (is_const(a, 0.0)) return constant(0.0);
    if (is_const(b, 1.0)) return a;
    return push(Op::kDiv, a.idx, b.idx);
}

NodeId Graph::neg(NodeId a) {
    check(a);
    if (is_const(a)) return constant(-values_[a.idx]);
    if (nodes_[a.idx].op == Op::kNeg) return NodeId{nodes_[a.idx].a};
    return push(Op::kNeg, a.idx, -1);
}

NodeId Graph::pow_int(NodeId a, int k) {
    check(a);
    if (k == 0) return constant(1.0);
    if (k == 1) return a;
    if (is_const(a)) return constant(std::pow(values_[a.idx], k));
    if (k == 2) return mul(a, a);
    return push(Op::kPowInt, a.idx, -1, static_cast<double>(k));
}

NodeId Graph::pow_real(NodeId a, double p) {
    check(a);
    if (p == 0.0) return constant(1.0);
    if (p == 1.0) return a;
    if (is_const(a)) return constant(std::pow(values_[a.idx], p));
    return push(Op::kPowReal, a.idx, -1, p);
}

#define FEATLAB_UNARY(NAME, OP, FN)                             \
    NodeId Graph::NAME(NodeId a) {                              \
        check(a);                                               \
        if (is_const(a)) return constant(FN(values_[a.idx]));   \
        return push(OP, a.idx, -1);                             \
    }
FEATLAB_UNARY(exp, Op::kExp, std::exp)
FEATLAB_UNARY(log, Op::kLog, std::log)
FEATLAB_UNARY(sin, Op::kSin, std::sin)
FEATLAB_UNARY(cos, Op::kCos, std::cos)
FEATLAB_UNARY(tanh, Op::kTanh, std::tanh)
FEATLAB_UNARY(sqrt, Op::kSqrt, std::sqrt)
FEATLAB_UNARY(abs, Op::kAbs, std::fabs)
#undef FEATLAB_UNARY

NodeId Graph::max_with(NodeId a, double c) {
    check(a);
    if (is_const(a)) return constant(std::fmax(values_[a.idx], c));
    return push(Op::kMaxS, a.idx, -1, c);
}

void Graph::set_value(NodeId leaf, double v) {
    check(leaf);
    if (!is_leaf(leaf)) throw std::invalid_argument("set_value: not an input/param leaf");
    values_[leaf.idx] = v;
}

double eval_op(Op op, double a, double b, double payload) {
    switch (op) {
        case Op::kAdd: return a + b;
        case Op::kSub: return a - b;
        case Op::kMul: return a * b;
        case Op::kDiv: return a / b;
        case Op::kNeg: return -a;
        case Op::kPowInt: return std::pow(a, payload);
        case Op::kPowReal: return std::pow(a, payload);
        case Op::kExp: return std::exp(a);
        case Op::kLog: return std::log(a);
        case Op::kSin: return std::sin(a);
        case Op::kCos: return std::cos(a);
        case Op::kTanh: return std::tanh(a);
        case Op::kSqrt: return std::sqrt(a);
        case Op::kAbs: return std::fabs(a);
        case Op::kMaxS: return std::fmax(a, payload);
        default: return a;  // leaves keep their stored value
    }
}

void Graph::eval() {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (n.op == Op::kConst || n.op == Op::kInput || n.op == Op::kParam) continue;
        double a = values_[n.a];
        double b = n.b >= 0 ? values_[n.b] : 0.0;
        values_[i] = eval_op(n.op, a, b, n.payload);
    }
}

double Graph::eval(NodeId out) {
    check(out);
    for (std::int32_t i = 0; i <= out.idx; ++i) {
        const Node& n = nodes_[i];
        if (n.op == Op::kConst || n.op == Op::kInput || n.op == Op::kParam) continue;
        double a = values_[n.a];
        double b = n.b >= 0 ? values_[n.b] : 0.0;
        values_[i] = eval_op(n.op, a, b, n.payload);
    }
    return values_[out.idx];
}

// Derivative of node i given derivatives d[] of its parents.
NodeId Graph::derive_node(std::int32_t i, NodeId /*wrt*/, const std::vector<NodeId>& d) {
    const Node n = nodes_[i];  // copy: builders may reallocate nodes_
    NodeId self{i};
    NodeId a{n.a}, b{n.b};
    NodeId da = n.a >= 0 ? d[n.a] : NodeId{};
    NodeId db = n.b >= 0 ? d[n.b] : NodeId{};
    auto dz = [&](NodeId x) { return x.valid() ? x : constant(0.0); };
    switch (n.op) {
        case Op::kAdd: return add(dz(da), dz(db));
        case Op::kSub: return sub(dz(da), dz(db));
        case Op::kMul: return add(mul(dz(da), b), mul(a, dz(db)));
        case Op::kDiv:
            // da/b - a*db/b^2
            return sub(div(dz(da), b), div(mul(a, dz(db)), mul(b, b)));
        case Op::kNeg: return neg(dz(da));
        case Op::kPowInt: {
            int k = static_cast<int>(n.payload);
            return mul(scale(static_cast<double>(k), pow_int(a, k - 1)), dz(da));
        }
        case Op::kPowReal:
            return mul(scale(n.payload, pow_real(a, n.payload - 1.0)), dz(da));
        case Op::kExp: return mul(self, dz(da));
        case Op::kLog: return div(dz(da), a);
        case Op::kSin: return mul(cos(a), dz(da));
        case Op::kCos: return neg(mul(sin(a), dz(da)));
        case Op::kTanh: return mul(sub(constant(1.0), mul(self, self)), dz(da));
        case Op::kSqrt: return div(dz(da), scale(2.0, self));
        case Op::kAbs:
            // subgradient sign(x), exactly 0 at x = 0:
            // x / max(|x|, DBL_MIN) is +-1 for normal x and 0 at the origin
            return mul(div(a, max_with(abs(a), DBL_MIN)), dz(da));
        case Op::kMaxS: {
            // step(x - c) with the tie resolved to 0
            NodeId shifted = sub(a, constant(n.payload));
            NodeId sign = div(shifted, max_with(abs(shifted), DBL_MIN));
            return mul(max_with(sign, 0.0), dz(da));
        }
        default: return constant(0.0);
    }
}

NodeId Graph::derive(NodeId out, NodeId wrt) {
    check(out);
    check(wrt);
    if (!is_leaf(wrt)) throw std::invalid_argument("derive: wrt must be an input or param leaf");

    auto key = [wrt](std::int32_t i) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
               static_cast<std::uint32_t>(wrt.idx);
    };
    if (auto it = deriv_cache_.find(key(out.idx)); it != deriv_cache_.end())
        return NodeId{it->second};

    const std::int32_t n = out.idx + 1;
    // ancestors of out (via parent links)
    std::vector<char> needed(n, 0);
    needed[out.idx] = 1;
    for (std::int32_t i = out.idx; i >= 0; --i) {
        if (!needed[i]) continue;
        const Node& nd = nodes_[i];
        if (nd.a >= 0) needed[nd.a] = 1;
        if (nd.b >= 0) needed[nd.b] = 1;
    }
    // nodes depending on wrt
    std::vector<char> dep(n, 0);
    if (wrt.idx < n) dep[wrt.idx] = 1;
    for (std::int32_t i = wrt.idx + 1; i < n; ++i) {
        const Node& nd = nodes_[i];
        dep[i] = (nd.a >= 0 && dep[nd.a]) || (nd.b >= 0 && dep[nd.b]);
    }
    if (!dep[out.idx]) {
        NodeId zero = constant(0.0);
        deriv_cache_.emplace(key(out.idx), zero.idx);
        return zero;
    }

    std::vector<NodeId> d(n);
    NodeId zero = constant(0.0);
    NodeId one = constant(1.0);
    for (std::int32_t i = 0; i < n; ++i) {
        if (!needed[i] || !dep[i]) { d[i] = zero; continue; }
        if (auto it = deriv_cache_.find(key(i)); it != deriv_cache_.end()) {
            d[i] = NodeId{it->second};
            continue;
        }
        NodeId di = (i == wrt.idx) ? one : derive_node(i, wrt, d);
        d[i] = di;
        deriv_cache_.emplace(key(i), di.idx);
    }
    return d[out.idx];
}

void op_partials(Op op, double va, double vb, double payload, double self,
                 double& da, double& db) {
    da = 0.0;
    db = 0.0;
    switch (op) {
        case Op::kAdd: da = 1.0; db = 1.0; break;
        case Op::kSub: da = 1.0; db = -1.0; break;
        case Op::kMul: da = vb; db = va; break;
        case Op::kDiv: da = 1.0 / vb; db = -self / vb; break;
        case Op::kNeg: da = -1.0; break;
        case Op::kPowInt:
        case Op::kPowReal: da = payload * std::pow(va, payload - 1.0); break;
        case Op::kExp: da = self; break;
        case Op::kLog: da = 1.0 / va; break;
        case Op::kSin: da = std::cos(va); break;
        case Op::kCos: da = -std::sin(va); break;
        case Op::kTanh: da = 1.0 - self * self; break;
        case Op::kSqrt: da = 0.5 / self; break;
        case Op::kAbs: da = va > 0.0 ? 1.0 : (va < 0.0 ? -1.0 : 0.0); break;
        case Op::kMaxS: da = va > payload ? 1.0 : 0.0; break;
        default: break;
    }
}

std::vector<double> Graph::grad_all(NodeId out, std::span<const NodeId> wrt) {
    check(out);
    eval(out);
    const std::int32_t n = out.idx + 1;
    std::vector<double> adj(n, 0.0);
    adj[out.idx] = 1.0;
    for (std::int32_t i = out.idx; i >= 0; --i) {
        if (adj[i] == 0.0) continue;
        const Node& nd = nodes_[i];
        if (nd.a < 0) continue;
        double da, db;
        double vb = nd.b >= 0 ? values_[nd.b] : 0.0;
        op_partials(nd.op, values_[nd.a], vb, nd.payload, values_[i], da, db);
        adj[nd.a] += adj[i] * da;
        if (nd.b >= 0) adj[nd.b] += adj[i] * db;
    }
    std::vector<double> g(wrt.size());
    for (std::size_t k = 0; k < wrt.size(); ++k) {
        check(wrt[k]);
        g[k] = wrt[k].idx < n ? adj[wrt[k].idx] : 0.0;
    }
    return g;
}

}  // namespace featlab::ad
