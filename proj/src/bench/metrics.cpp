#include "featlab/bench/metrics.hpp"

#include <cmath>

#include "featlab/autodiff/batch.hpp"
#include "featlab/util/rng.hpp"

namespace featlab::bench {

namespace {
constexpr std::uint64_t kEvalSeed = 0x5eed4e7a1ULL;  // fixed: grids are config, not run state
}

std::vector<double> eval_grid(const pde::PdeProblem& prob) {
    const int n = prob.input_dim;
    std::vector<double> pts;
    auto push_if_inside = [&](std::span<const double> p) {
        if (prob.inside(p)) pts.insert(pts.end(), p.begin(), p.end());
    };
    if (n == 1) {
        const int res = 1024;
        for (int i = 0; i < res; ++i) {
            double x = prob.lo[0] + (prob.hi[0] - prob.lo[0]) * i / (res - 1.0);
            push_if_inside(std::span<const double>(&x, 1));
        }
    } else if (n == 2) {
        const int res = 256;
        double p[2];
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < res; ++j) {
                p[0] = prob.lo[0] + (prob.hi[0] - prob.lo[0]) * i / (res - 1.0);
                p[1] = prob.lo[1] + (prob.hi[1] - prob.lo[1]) * j / (res - 1.0);
                push_if_inside(std::span<const double>(p, 2));
            }
    } else {
        const int count = 100000;
        auto rng = make_rng(kEvalSeed, "eval.grid");
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> p(n);
        for (int i = 0; i < count; ++i) {
            for (int k = 0; k < n; ++k) p[k] = prob.lo[k] + (prob.hi[k] - prob.lo[k]) * u(rng);
            push_if_inside(p);
        }
    }
    return pts;
}

std::vector<double> predict(const pde::PdeProblem& prob, const net::NetworkSpec& spec,
                            const net::ParamStore& store, std::uint64_t seed,
                            std::span<const double> pts, int npts) {
    std::vector<net::CoeffSpec> coeffs;
    for (const auto& c : prob.inverse_coeffs) coeffs.push_back({c.name, c.init_value});
    ad::Graph g;
    fm::FrozenState frozen = fm::init_frozen(net::seeded_feature_map(spec, seed), prob.input_dim);
    net::NetGraph ng = net::build_net_graph(spec, frozen, g, coeffs);
    ad::BatchEval be(g, ng.outputs, ng.x, ng.param_leaves);
    be.set_params(store.values());
    std::vector<double> out(static_cast<std::size_t>(npts) * prob.output_dim);
    be.forward(pts, npts, out);
    return out;
}

double rel_l2(const pde::PdeProblem& prob, const net::NetworkSpec& spec,
              const net::ParamStore& store, std::uint64_t seed) {
    if (!prob.has_reference())
        throw MetricUnavailable("rel_l2: no reference solution for " + prob.name);
    auto pts = eval_grid(prob);
    const int n = prob.input_dim, d = prob.output_dim;
    const int npts = static_cast<int>(pts.size()) / n;
    auto pred = predict(prob, spec, store, seed, pts, npts);

    double num = 0.0, den = 0.0;
    std::vector<double> ref(d);
    for (int i = 0; i < npts; ++i) {
        prob.reference(std::span<const double>(pts).subspan(static_cast<std::size_t>(i) * n, n), ref);
        for (int c = 0; c < d; ++c) {
            double diff = pred[static_cast<std::size_t>(i) * d + c] - ref[c];
            num += diff * diff;
            den += ref[c] * ref[c];
        }
    }
    if (den == 0.0) throw MetricUnavailable("rel_l2: reference is identically zero");
    return std::sqrt(num) / std::sqrt(den);
}

ResidualStats residual_bc_mse(const pde::PdeProblem& prob, const net::NetworkSpec& spec,
                              const net::ParamStore& store, std::uint64_t seed, int n_interior,
                              int n_bc) {
    std::vector<net::CoeffSpec> coeffs;
    for (const auto& c : prob.inverse_coeffs) coeffs.push_back({c.name, c.init_value});
    fm::FrozenState frozen = fm::init_frozen(net::seeded_feature_map(spec, seed), prob.input_dim);
    pde::SampleCounts counts;
    counts.interior = n_interior;
    counts.per_bc = n_bc;
    pde::SampleSet samples = pde::sample(prob, counts, kEvalSeed);
    const int n = prob.input_dim;

    ResidualStats stats;
    {
        ad::Graph g;
        net::NetGraph ng = net::build_net_graph(spec, frozen, g, coeffs);
        pde::Field field{&g, ng.x, ng.outputs};
        auto res = prob.residual(field, ng.coeff_leaves, g);
        ad::BatchEval be(g, res, ng.x, ng.param_leaves);
        be.set_params(store.values());
        const int k = static_cast<int>(res.size());
        std::vector<double> vals(static_cast<std::size_t>(n_interior) * k);
        be.forward(samples.interior, n_interior, vals);
        double s = 0.0;
        for (double v : vals) s += v * v;
        stats.residual_mse = s / n_interior;
    }
    double bc_sum = 0.0;
    for (std::size_t si = 0; si < prob.bc_sets.size(); ++si) {
        const auto& set = prob.bc_sets[si];
        ad::Graph g;
        net::NetGraph ng = net::build_net_graph(spec, frozen, g, coeffs);
        pde::Field field{&g, ng.x, ng.outputs};
        std::vector<ad::NodeId> outs;
        for (int c : set.components)
            outs.push_back(set.kind == pde::BcKind::kTimeDerivative ? field.d(c, set.deriv_axis)
                                                                    : field.out(c));
        ad::BatchEval be(g, outs, ng.x, ng.param_leaves);
        be.set_params(store.values());
        const auto& pts = samples.boundary[si];
        const int nb = static_cast<int>(pts.size()) / n;
        std::vector<double> vals(static_cast<std::size_t>(nb) * outs.size());
        be.forward(pts, nb, vals);
        std::vector<double> tgt(outs.size());
        double s = 0.0;
        for (int i = 0; i < nb; ++i) {
            set.target(std::span<const double>(pts).subspan(static_cast<std::size_t>(i) * n, n), tgt);
            for (std::size_t c = 0; c < outs.size(); ++c) {
                double diff = vals[i * outs.size() + c] - tgt[c];
                s += diff * diff;
            }
        }
        bc_sum += s / nb;
    }
    stats.bc_mse = bc_sum;
    return stats;
}

}  // namespace featlab::bench
