#include "featlab/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <memory>

#include "featlab/autodiff/batch.hpp"
#include "featlab/util/csv.hpp"
#include "featlab/util/rng.hpp"

namespace featlab::train {

void TrainTrace::to_csv(const std::filesystem::path& path) const {
    std::vector<std::string> header = {"iteration", "loss_total", "loss_residual",
                                       "loss_bc", "loss_data"};
    for (const auto& c : coeff_names) header.push_back("coeff_" + c);
    header.push_back("wall_seconds");
    CsvWriter w(path, header);
    for (const auto& r : rows) {
        std::vector<CsvCell> cells{static_cast<long long>(r.iter), r.total, r.res, r.bc, r.data};
        for (double c : r.coeffs) cells.emplace_back(c);
        cells.emplace_back(r.wall_s);
        w.row(cells);
    }
}

namespace {

// one loss term: a graph, its batched evaluator, points and targets
struct Term {
    std::unique_ptr<ad::Graph> graph;
    std::unique_ptr<ad::BatchEval> be;
    std::vector<double> pts;      // row-major
    std::vector<double> targets;  // row-major [pt][out]; empty = all zero
    int npts = 0;
    int nout = 0;
    double weight = 1.0;
};

Term make_term(const pde::PdeProblem& prob, const net::NetworkSpec& spec,
               const fm::FrozenState& frozen, std::span<const net::CoeffSpec> coeffs,
               int which_bc /* -1 residual, -2 data */) {
    Term t;
    t.graph = std::make_unique<ad::Graph>();
    net::NetGraph ng = net::build_net_graph(spec, frozen, *t.graph, coeffs);
    std::vector<ad::NodeId> outs;
    if (which_bc == -1) {
        pde::Field field{t.graph.get(), ng.x, ng.outputs};
        outs = prob.residual(field, ng.coeff_leaves, *t.graph);
    } else if (which_bc == -2) {
        outs = ng.outputs;
    } else {
        const auto& set = prob.bc_sets[which_bc];
        pde::Field field{t.graph.get(), ng.x, ng.outputs};
        for (int c : set.components)
            outs.push_back(set.kind == pde::BcKind::kTimeDerivative ? field.d(c, set.deriv_axis)
                                                                    : field.out(c));
    }
    t.nout = static_cast<int>(outs.size());
    t.be = std::make_unique<ad::BatchEval>(*t.graph, outs, ng.x, ng.param_leaves);
    return t;
}

void fill_bc_targets(const pde::PdeProblem& prob, int s, Term& t) {
    const auto& set = prob.bc_sets[s];
    const int n = prob.input_dim;
    t.npts = static_cast<int>(t.pts.size()) / n;
    t.targets.resize(static_cast<std::size_t>(t.npts) * t.nout);
    std::vector<double> tgt(t.nout);
    for (int i = 0; i < t.npts; ++i) {
        set.target(std::span<const double>(t.pts).subspan(static_cast<std::size_t>(i) * n, n), tgt);
        for (int j = 0; j < t.nout; ++j) t.targets[static_cast<std::size_t>(i) * t.nout + j] = tgt[j];
    }
}

// accumulates sum of squared mismatches and seeds d(weight/N * sum)/d(out)
double run_term(Term& t, std::span<const double> params, std::span<double> grads) {
    t.be->set_params(params);
    double sq_sum = 0.0;
    const double seed_scale = 2.0 * t.weight / t.npts;
    t.be->forward_reverse(
        t.pts, t.npts,
        [&](const ad::BatchEval::ChunkView& view) {
            for (int j = 0; j < t.nout; ++j) {
                const double* out = view.out(j);
                double* seed = view.seed(j);
                for (int p = 0; p < view.count; ++p) {
                    double target = t.targets.empty()
                                        ? 0.0
                                        : t.targets[static_cast<std::size_t>(view.first + p) * t.nout + j];
                    double r = out[p] - target;
                    sq_sum += r * r;
                    seed[p] = seed_scale * r;
                }
            }
        },
        grads);
    return t.weight / t.npts * sq_sum;
}

}  // namespace

FitResult fit(const pde::PdeProblem& prob, const net::NetworkSpec& spec, const TrainConfig& cfg,
              const pde::SampleCounts& counts, const pde::Observations* data) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const int n = prob.input_dim;

    if (prob.is_inverse() && (!data || data->size() == 0))
        throw std::invalid_argument("fit: inverse problem requires observations");

    std::vector<net::CoeffSpec> coeffs;
    for (const auto& c : prob.inverse_coeffs) coeffs.push_back({c.name, c.init_value});

    net::ParamStore store = net::init_params(spec, cfg.seed, coeffs);
    fm::FrozenState frozen = fm::init_frozen(net::seeded_feature_map(spec, cfg.seed), n);
    pde::SampleSet samples = pde::sample(prob, counts, cfg.seed);

    Term residual = make_term(prob, spec, frozen, coeffs, -1);
    residual.pts = samples.interior;
    residual.npts = samples.n_interior();
    residual.weight = cfg.lambda_r;

    std::vector<Term> bc_terms;
    for (std::size_t s = 0; s < prob.bc_sets.size(); ++s) {
        Term t = make_term(prob, spec, frozen, coeffs, static_cast<int>(s));
        t.pts = samples.boundary[s];
        t.weight = cfg.lambda_bc;
        fill_bc_targets(prob, static_cast<int>(s), t);
        bc_terms.push_back(std::move(t));
    }

    Term data_term;
    if (data && data->size() > 0) {
        data_term = make_term(prob, spec, frozen, coeffs, -2);
        data_term.pts = data->x;
        data_term.npts = data->size();
        data_term.targets = data->u;
        data_term.weight = cfg.lambda_data;
    }

    FitResult result;
    result.trace.coeff_names.reserve(coeffs.size());
    for (const auto& c : coeffs) result.trace.coeff_names.push_back(c.name);
    const std::size_t coeff_offset = store.size() - coeffs.size();

    std::vector<double> grads(store.size());
    AdamState adam;
    auto record = [&](int it, double lr_, double lbc, double ldata) {
        TrainTrace::Row row;
        row.iter = it;
        row.res = lr_;
        row.bc = lbc;
        row.data = ldata;
        row.total = lr_ + lbc + ldata;
        for (std::size_t k = 0; k < coeffs.size(); ++k)
            row.coeffs.push_back(store.values()[coeff_offset + k]);
        row.wall_s = std::chrono::duration<double>(clock::now() - t0).count();
        result.trace.rows.push_back(std::move(row));
        return result.trace.rows.back().total;
    };

    for (int it = 1; it <= cfg.iterations; ++it) {
        if (cfg.resample_every > 0 && it > 1 && (it - 1) % cfg.resample_every == 0) {
            pde::SampleCounts rc = counts;
            pde::SampleSet fresh =
                pde::sample(prob, rc, mix64(stream_seed(cfg.seed, "resample") ^ it));
            residual.pts = std::move(fresh.interior);
            residual.npts = static_cast<int>(residual.pts.size()) / n;
        }
        std::fill(grads.begin(), grads.end(), 0.0);
        double loss_r = run_term(residual, store.values(), grads);
        double loss_bc = 0.0;
        for (auto& t : bc_terms) loss_bc += run_term(t, store.values(), grads);
        double loss_d = data_term.npts > 0 ? run_term(data_term, store.values(), grads) : 0.0;
        double total = loss_r + loss_bc + loss_d;
        if (!std::isfinite(total))
            throw NumericalAbort("fit: non-finite loss at iteration " + std::to_string(it) +
                                 " on " + prob.name);
        if (it % cfg.log_every == 0 || it == cfg.iterations || it == 1)
            result.final_loss = record(it, loss_r, loss_bc, loss_d);
        adam_step(store.values(), grads, cfg, adam, coeff_offset);
    }
    if (cfg.iterations == 0) record(0, 0.0, 0.0, 0.0);

    result.params = std::move(store);
    return result;
}

}  // namespace featlab::train
