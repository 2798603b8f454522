#include "featlab/autodiff/batch.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace featlab::ad {

BatchEval::BatchEval(const Graph& g, std::vector<NodeId> outputs, std::vector<NodeId> inputs,
                     std::vector<NodeId> params, int chunk)
    : outputs_(std::move(outputs)),
      inputs_(std::move(inputs)),
      params_(std::move(params)),
      chunk_(chunk) {
    const auto n = static_cast<std::int32_t>(g.size());

    // active = ancestors of any output
    std::vector<char> active(n, 0);
    for (NodeId o : outputs_) active[o.idx] = 1;
    for (std::int32_t i = n - 1; i >= 0; --i) {
        if (!active[i]) continue;
        const Node& nd = g.node(NodeId{i});
        if (nd.a >= 0) active[nd.a] = 1;
        if (nd.b >= 0) active[nd.b] = 1;
    }
    for (NodeId in : inputs_) active[in.idx] = 1;  // inputs always get slots
    for (NodeId p : params_) active[p.idx] = 1;

    std::vector<char> varying(n, 0);
    for (NodeId in : inputs_) varying[in.idx] = 1;

    std::vector<std::int32_t> vslot(n, -1), uslot(n, -1);
    int n_uslots = 0;
    for (std::int32_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        const Node& nd = g.node(NodeId{i});
        bool is_op = nd.op != Op::kConst && nd.op != Op::kInput && nd.op != Op::kParam;
        if (is_op)
            varying[i] = (nd.a >= 0 && varying[nd.a]) || (nd.b >= 0 && varying[nd.b]);
        if (varying[i]) {
            vslot[i] = n_vslots_++;
            if (!is_op) continue;  // input leaf
            Instr ins{nd.op, vslot[i], 0, 0, nd.payload, false, false, nd.b >= 0};
            ins.a_varying = varying[nd.a];
            ins.a = ins.a_varying ? vslot[nd.a] : uslot[nd.a];
            if (nd.b >= 0) {
                ins.b_varying = varying[nd.b];
                ins.b = ins.b_varying ? vslot[nd.b] : uslot[nd.b];
            }
            vprog_.push_back(ins);
        } else {
            uslot[i] = n_uslots++;
            if (nd.op == Op::kConst) {
                uval_.push_back(nd.payload);
                upar_.push_back(1);
            } else if (nd.op == Op::kParam) {
                uval_.push_back(0.0);
                upar_.push_back(1);
            } else {
                uval_.push_back(0.0);
                upar_.push_back(0);
                Instr ins{nd.op, uslot[i], uslot[nd.a], nd.b >= 0 ? uslot[nd.b] : 0,
                          nd.payload, false, false, nd.b >= 0};
                uprog_.push_back(ins);
            }
        }
    }

    in_slot_.reserve(inputs_.size());
    for (NodeId in : inputs_) {
        if (g.node(in).op != Op::kInput) throw std::invalid_argument("BatchEval: not an input leaf");
        in_slot_.push_back(vslot[in.idx]);
    }
    par_slot_.reserve(params_.size());
    for (NodeId p : params_) {
        if (g.node(p).op != Op::kParam) throw std::invalid_argument("BatchEval: not a param leaf");
        par_slot_.push_back(uslot[p.idx]);
    }
    out_slot_.reserve(outputs_.size());
    for (NodeId o : outputs_) {
        if (vslot[o.idx] < 0)
            throw std::invalid_argument("BatchEval: output does not depend on any input");
        out_slot_.push_back(vslot[o.idx]);
    }

    val_.resize(static_cast<std::size_t>(n_vslots_) * chunk_);
    vadj_.resize(val_.size());
    uadj_.resize(uval_.size());
    vinit_.resize(n_vslots_);
    uinit_.resize(uval_.size());
}

void BatchEval::set_params(std::span<const double> values) {
    if (values.size() != params_.size())
        throw std::invalid_argument("BatchEval: param count mismatch");
    for (std::size_t k = 0; k < values.size(); ++k)
        if (par_slot_[k] >= 0) uval_[par_slot_[k]] = values[k];
    for (const Instr& ins : uprog_) {
        double a = uval_[ins.a];
        double b = ins.has_b ? uval_[ins.b] : 0.0;
        uval_[ins.dst] = eval_op(ins.op, a, b, ins.payload);
    }
}

void BatchEval::run_forward_chunk(const double* pts, int pt0, int count, int stride) {
    const int c = count;
    for (std::size_t k = 0; k < in_slot_.size(); ++k) {
        double* dst = &val_[static_cast<std::size_t>(in_slot_[k]) * chunk_];
        for (int p = 0; p < c; ++p) dst[p] = pts[static_cast<std::size_t>(pt0 + p) * stride + k];
    }
    for (const Instr& ins : vprog_) {
        double* dst = &val_[static_cast<std::size_t>(ins.dst) * chunk_];
        const double* pa = ins.a_varying ? &val_[static_cast<std::size_t>(ins.a) * chunk_] : nullptr;
        const double ua = ins.a_varying ? 0.0 : uval_[ins.a];
        const double* pb = (ins.has_b && ins.b_varying) ? &val_[static_cast<std::size_t>(ins.b) * chunk_] : nullptr;
        const double ub = (ins.has_b && !ins.b_varying) ? uval_[ins.b] : 0.0;
        const double payload = ins.payload;

#define FEATLAB_BIN(EXPR)                                                            \
    do {                                                                             \
        if (pa && pb) { for (int p = 0; p < c; ++p) { double A = pa[p], B = pb[p]; dst[p] = (EXPR); } } \
        else if (pa)  { for (int p = 0; p < c; ++p) { double A = pa[p], B = ub;    dst[p] = (EXPR); } } \
        else          { for (int p = 0; p < c; ++p) { double A = ua,    B = pb[p]; dst[p] = (EXPR); } } \
    } while (0)

        switch (ins.op) {
            case Op::kAdd: FEATLAB_BIN(A + B); break;
            case Op::kSub: FEATLAB_BIN(A - B); break;
            case Op::kMul: FEATLAB_BIN(A * B); break;
            case Op::kDiv: FEATLAB_BIN(A / B); break;
            case Op::kNeg: for (int p = 0; p < c; ++p) dst[p] = -pa[p]; break;
            case Op::kPowInt:
            case Op::kPowReal: for (int p = 0; p < c; ++p) dst[p] = std::pow(pa[p], payload); break;
            case Op::kExp: for (int p = 0; p < c; ++p) dst[p] = std::exp(pa[p]); break;
            case Op::kLog: for (int p = 0; p < c; ++p) dst[p] = std::log(pa[p]); break;
            case Op::kSin: for (int p = 0; p < c; ++p) dst[p] = std::sin(pa[p]); break;
            case Op::kCos: for (int p = 0; p < c; ++p) dst[p] = std::cos(pa[p]); break;
            case Op::kTanh: for (int p = 0; p < c; ++p) dst[p] = std::tanh(pa[p]); break;
            case Op::kSqrt: for (int p = 0; p < c; ++p) dst[p] = std::sqrt(pa[p]); break;
            case Op::kAbs: for (int p = 0; p < c; ++p) dst[p] = std::fabs(pa[p]); break;
            case Op::kMaxS: for (int p = 0; p < c; ++p) dst[p] = std::fmax(pa[p], payload); break;
            default: break;
        }
#undef FEATLAB_BIN
    }
}

namespace {

// accumulate term(p) into an adjoint row, initializing it on first touch
template <class F>
inline void acc_row(double* row, char& init, int c, F&& term) {
    if (!init) {
        for (int p = 0; p < c; ++p) row[p] = term(p);
        init = 1;
    } else {
        for (int p = 0; p < c; ++p) row[p] += term(p);
    }
}

template <class F>
inline double reduce_row(int c, F&& term) {
    double s = 0.0;
    for (int p = 0; p < c; ++p) s += term(p);
    return s;
}

}  // namespace

void BatchEval::run_reverse_chunk(int count) {
    const int c = count;
    for (auto it = vprog_.rbegin(); it != vprog_.rend(); ++it) {
        const Instr& ins = *it;
        if (!vinit_[ins.dst]) continue;  // no child seeded this node: adjoint is zero
        const double* adj = &vadj_[static_cast<std::size_t>(ins.dst) * chunk_];
        const double* dv = &val_[static_cast<std::size_t>(ins.dst) * chunk_];
        const double* pa = ins.a_varying ? &val_[static_cast<std::size_t>(ins.a) * chunk_] : nullptr;
        const double ua = ins.a_varying ? 0.0 : uval_[ins.a];
        const double* pb = (ins.has_b && ins.b_varying) ? &val_[static_cast<std::size_t>(ins.b) * chunk_] : nullptr;
        const double ub = (ins.has_b && !ins.b_varying) ? uval_[ins.b] : 0.0;
        const double payload = ins.payload;

        auto A = [&](int p) { return pa ? pa[p] : ua; };
        auto B = [&](int p) { return pb ? pb[p] : ub; };
        // route d(child)/d(operand) * adj into a varying row or a uniform scalar
        auto to_a = [&](auto&& partial) {
            if (ins.a_varying)
                acc_row(&vadj_[static_cast<std::size_t>(ins.a) * chunk_], vinit_[ins.a], c,
                        [&](int p) { return adj[p] * partial(p); });
            else
                uadj_[ins.a] += reduce_row(c, [&](int p) { return adj[p] * partial(p); }),
                    uinit_[ins.a] = 1;
        };
        auto to_b = [&](auto&& partial) {
            if (ins.b_varying)
                acc_row(&vadj_[static_cast<std::size_t>(ins.b) * chunk_], vinit_[ins.b], c,
                        [&](int p) { return adj[p] * partial(p); });
            else
                uadj_[ins.b] += reduce_row(c, [&](int p) { return adj[p] * partial(p); }),
                    uinit_[ins.b] = 1;
        };

        switch (ins.op) {
            case Op::kAdd:
                to_a([&](int) { return 1.0; });
                to_b([&](int) { return 1.0; });
                break;
            case Op::kSub:
                to_a([&](int) { return 1.0; });
                to_b([&](int) { return -1.0; });
                break;
            case Op::kMul:
                to_a([&](int p) { return B(p); });
                to_b([&](int p) { return A(p); });
                break;
            case Op::kDiv:
                // d/da = 1/b; d/db = -a/b^2 = -(dst)/b
                to_a([&](int p) { return 1.0 / B(p); });
                to_b([&](int p) { return -dv[p] / B(p); });
                break;
            case Op::kNeg: to_a([&](int) { return -1.0; }); break;
            case Op::kPowInt:
            case Op::kPowReal:
                to_a([&](int p) { return payload * std::pow(A(p), payload - 1.0); });
                break;
            case Op::kExp: to_a([&](int p) { return dv[p]; }); break;
            case Op::kLog: to_a([&](int p) { return 1.0 / A(p); }); break;
            case Op::kSin: to_a([&](int p) { return std::cos(A(p)); }); break;
            case Op::kCos: to_a([&](int p) { return -std::sin(A(p)); }); break;
            case Op::kTanh: to_a([&](int p) { double t = dv[p]; return 1.0 - t * t; }); break;
            case Op::kSqrt: to_a([&](int p) { return 0.5 / dv[p]; }); break;
            case Op::kAbs:
                to_a([&](int p) { double a = A(p); return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); });
                break;
            case Op::kMaxS: to_a([&](int p) { return A(p) > payload ? 1.0 : 0.0; }); break;
            default: break;
        }
    }
    // uniform chain: children all processed (varying above, uniform below in
    // descending order), so each adjoint is complete when propagated
    for (auto it = uprog_.rbegin(); it != uprog_.rend(); ++it) {
        const Instr& ins = *it;
        if (!uinit_[ins.dst]) continue;
        double da, db;
        double vb = ins.has_b ? uval_[ins.b] : 0.0;
        op_partials(ins.op, uval_[ins.a], vb, ins.payload, uval_[ins.dst], da, db);
        uadj_[ins.a] += uadj_[ins.dst] * da;
        uinit_[ins.a] = 1;
        if (ins.has_b) {
            uadj_[ins.b] += uadj_[ins.dst] * db;
            uinit_[ins.b] = 1;
        }
    }
}

void BatchEval::forward(std::span<const double> pts, int npts, std::span<double> out) {
    const int nin = n_inputs(), nout = n_outputs();
    if (npts > 0 && pts.size() < static_cast<std::size_t>(npts) * nin)
        throw std::invalid_argument("BatchEval: point buffer too small");
    if (out.size() < static_cast<std::size_t>(npts) * nout)
        throw std::invalid_argument("BatchEval: output buffer too small");
    for (int pt0 = 0; pt0 < npts; pt0 += chunk_) {
        int c = std::min(chunk_, npts - pt0);
        run_forward_chunk(pts.data(), pt0, c, nin);
        for (int j = 0; j < nout; ++j) {
            const double* src = &val_[static_cast<std::size_t>(out_slot_[j]) * chunk_];
            for (int p = 0; p < c; ++p) out[static_cast<std::size_t>(pt0 + p) * nout + j] = src[p];
        }
    }
}

void BatchEval::forward_reverse(std::span<const double> pts, int npts, const SeedFn& fn,
                                std::span<double> param_grads) {
    const int nin = n_inputs(), nout = n_outputs();
    if (param_grads.size() < params_.size())
        throw std::invalid_argument("BatchEval: gradient buffer too small");
    std::vector<const double*> outs(nout);
    std::vector<double*> seeds(nout);
    std::vector<double> seed_rows(static_cast<std::size_t>(nout) * chunk_);

    for (int pt0 = 0; pt0 < npts; pt0 += chunk_) {
        int c = std::min(chunk_, npts - pt0);
        run_forward_chunk(pts.data(), pt0, c, nin);

        std::memset(seed_rows.data(), 0, seed_rows.size() * sizeof(double));
        for (int j = 0; j < nout; ++j) {
            outs[j] = &val_[static_cast<std::size_t>(out_slot_[j]) * chunk_];
            seeds[j] = &seed_rows[static_cast<std::size_t>(j) * chunk_];
        }
        ChunkView view{pt0, c, outs.data(), seeds.data()};
        fn(view);

        std::fill(vinit_.begin(), vinit_.end(), 0);
        std::fill(uinit_.begin(), uinit_.end(), 0);
        std::fill(uadj_.begin(), uadj_.end(), 0.0);
        for (int j = 0; j < nout; ++j) {
            double* row = &vadj_[static_cast<std::size_t>(out_slot_[j]) * chunk_];
            const double* s = seeds[j];
            acc_row(row, vinit_[out_slot_[j]], c, [&](int p) { return s[p]; });
        }
        run_reverse_chunk(c);
        for (std::size_t k = 0; k < params_.size(); ++k)
            if (par_slot_[k] >= 0 && uinit_[par_slot_[k]]) param_grads[k] += uadj_[par_slot_[k]];
    }
}

}  // namespace featlab::ad
