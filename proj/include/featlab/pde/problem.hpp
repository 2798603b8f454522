#pragma once

#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "featlab/autodiff/graph.hpp"

namespace featlab::pde {

struct Disk {
    double cx, cy, r;
};

struct RectHole {
    double x0, x1, y0, y1;
};

// Network (or hand-built expression) outputs at a symbolic point, with
// derivative nodes built on demand. Residual operators are written against
// this, so the same operator runs on a network and on an exact solution.
struct Field {
    ad::Graph* graph = nullptr;
    std::vector<ad::NodeId> x;
    std::vector<ad::NodeId> u;

    ad::NodeId out(int c) const { return u[c]; }
    ad::NodeId d(int c, int axis) { return graph->derive(u[c], x[axis]); }
    ad::NodeId d2(int c, int a1, int a2) { return graph->derive(d(c, a1), x[a2]); }
};

enum class BcKind { kDirichlet, kTimeDerivative, kInlet, kOutlet, kNoSlip };

// One boundary/initial condition set: where to sample, which output
// components are constrained, and their target values. kTimeDerivative
// constrains du/dt instead of u (the u_t = 0 initial condition).
struct BcSet {
    std::string name;
    BcKind kind = BcKind::kDirichlet;
    std::vector<int> components = {0};
    int deriv_axis = -1;
    std::function<void(std::span<const double>, std::span<double>)> target;
    std::function<void(std::mt19937_64&, std::span<double>)> sample;
};

struct InverseCoeff {
    std::string name;
    double true_value = 0.0;
    double init_value = 0.0;
};

using ResidualFn =
    std::function<std::vector<ad::NodeId>(Field&, std::span<const ad::NodeId>, ad::Graph&)>;
using PointFn = std::function<void(std::span<const double>, std::span<double>)>;
using ExprFn =
    std::function<std::vector<ad::NodeId>(std::span<const ad::NodeId>, ad::Graph&)>;

struct PdeProblem {
    std::string name;
    int input_dim = 2;
    int output_dim = 1;
    std::vector<double> lo, hi;  // axis-aligned domain box
    std::vector<Disk> disk_holes;
    std::vector<RectHole> rect_holes;

    ResidualFn residual;          // one node per governing equation
    std::vector<BcSet> bc_sets;
    PointFn reference;            // analytic or oracle solution; may be null
    ExprFn analytic_expr;         // closed form as graph nodes; may be null
    std::vector<InverseCoeff> inverse_coeffs;

    bool has_reference() const { return static_cast<bool>(reference); }
    bool is_inverse() const { return !inverse_coeffs.empty(); }
    bool inside(std::span<const double> x) const;  // in box and outside holes
};

// Registry of the benchmark problems: wave, diffusion, heat, poisson-holes,
// burgers, ns-step, poisson-nd-<D> (D = 1..10), i-burgers, i-lorenz.
PdeProblem make_problem(const std::string& name);
std::vector<std::string> problem_names();

struct SampleCounts {
    int interior = 10000;
    int per_bc = 400;
    bool uneven = false;  // last-axis sample density scaled by 1/D
};

struct SampleSet {
    int input_dim = 0;
    std::vector<double> interior;               // row-major
    std::vector<std::vector<double>> boundary;  // one block per bc set
    int n_interior() const {
        return input_dim ? static_cast<int>(interior.size()) / input_dim : 0;
    }
};

SampleSet sample(const PdeProblem& prob, const SampleCounts& counts, std::uint64_t seed);

struct Observations {
    int input_dim = 0, output_dim = 0;
    std::vector<double> x;  // row-major
    std::vector<double> u;  // row-major
    int size() const { return input_dim ? static_cast<int>(x.size()) / input_dim : 0; }
};

// I-Burgers: oracle values at random interior points. I-Lorenz: RK4 (step
// 1e-3) trajectory subsampled to n_points. noise_frac is the additive
// Gaussian noise level as a fraction of the per-component RMS (0.01 = 1%).
Observations gen_inverse_data(const PdeProblem& prob, int n_points, double noise_frac,
                              std::uint64_t seed);

void save_observations_csv(const Observations& obs, const std::string& path);
Observations load_observations_csv(const std::string& path);

}  // namespace featlab::pde
