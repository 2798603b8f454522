#pragma once

#include <functional>
#include <span>
#include <vector>

#include "featlab/autodiff/graph.hpp"

namespace featlab::ad {

// Evaluates one symbolic graph over a batch of input points, struct-of-arrays
// style, with a batched reverse sweep that accumulates d(sum of seeded
// outputs)/d(param) over all points.
//
// Nodes that do not depend on any input leaf ("uniform" nodes: constants,
// params and everything built from them) are evaluated once per set_params;
// only input-dependent nodes get per-point rows. Per-point evaluation order
// matches Graph::eval exactly, so values are bit-identical to scalar eval.
class BatchEval {
public:
    BatchEval(const Graph& g, std::vector<NodeId> outputs, std::vector<NodeId> inputs,
              std::vector<NodeId> params, int chunk = 64);

    int n_outputs() const { return static_cast<int>(outputs_.size()); }
    int n_inputs() const { return static_cast<int>(inputs_.size()); }
    int n_params() const { return static_cast<int>(params_.size()); }

    // one value per declared param leaf, in the order given at construction
    void set_params(std::span<const double> values);

    // pts is row-major [pt][input]; out is row-major [pt][output]
    void forward(std::span<const double> pts, int npts, std::span<double> out);

    // Caller inspects per-chunk output values and fills per-point adjoint
    // seeds; gradients of sum_p sum_j seed[j][p] * out[j][p] are accumulated
    // into param_grads (size n_params).
    struct ChunkView {
        int first;                    // global index of first point in chunk
        int count;
        const double* out(int j) const { return outs[j]; }
        double* seed(int j) const { return seeds[j]; }
        const double* const* outs;
        double* const* seeds;
    };
    using SeedFn = std::function<void(const ChunkView&)>;
    void forward_reverse(std::span<const double> pts, int npts, const SeedFn& fn,
                         std::span<double> param_grads);

    std::size_t active_nodes() const { return vprog_.size() + uprog_.size(); }

private:
    struct Instr {
        Op op;
        std::int32_t dst;    // slot in its own storage class
        std::int32_t a, b;   // operand slots (interpretation via flags)
        double payload;
        bool a_varying, b_varying, has_b;
    };

    void run_forward_chunk(const double* pts, int pt0, int count, int stride);
    void run_reverse_chunk(int count);

    std::vector<NodeId> outputs_, inputs_, params_;
    int chunk_;
    int n_vslots_ = 0;
    std::vector<Instr> vprog_;            // varying ops, ascending node order
    std::vector<Instr> uprog_;            // uniform ops, ascending node order
    std::vector<double> uval_;            // uniform slot values
    std::vector<std::int32_t> in_slot_;   // input leaf -> varying slot
    std::vector<std::int32_t> par_slot_;  // param leaf -> uniform slot (-1 if inactive)
    std::vector<std::int32_t> out_slot_;  // output -> varying slot
    std::vector<char> upar_;              // uniform slot is a leaf/const (no instr)

    // per-chunk workspaces
    std::vector<double> val_, vadj_, uadj_;
    std::vector<char> vinit_, uinit_;
};

}  // namespace featlab::ad
