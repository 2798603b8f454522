#include "featlab/bench/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "featlab/autodiff/batch.hpp"
#include "featlab/train/adam.hpp"
#include "featlab/util/csv.hpp"
#include "featlab/util/parallel.hpp"
#include "featlab/util/rng.hpp"

namespace featlab::bench {

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stdev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

fm::FeatureMapSpec mapping_preset(const std::string& name, int width, int n, int k_poly,
                                  double sigma) {
    fm::FeatureMapSpec spec;
    spec.family = fm::parse_family(name);
    spec.sigma = sigma;
    spec.k_poly = 0;
    switch (spec.family) {
        case fm::Family::kIdentity: spec.m = 1; break;
        case fm::Family::kBasicEncoding:
        case fm::Family::kPositionalEncoding: spec.m = std::max(1, width / (2 * n)); break;
        case fm::Family::kRandomFourier: spec.m = std::max(1, width / 2); break;
        case fm::Family::kSinusoidal: spec.m = width; break;
        case fm::Family::kComplexTriangle: spec.m = std::max(1, width / n); break;
        case fm::Family::kComplexGaussian: spec.m = width; break;
        case fm::Family::kRbf: spec.m = width; break;
        case fm::Family::kRbfP:
            spec.m = width;
            spec.k_poly = k_poly;
            break;
    }
    return spec;
}

net::NetworkSpec make_net_spec(const pde::PdeProblem& prob, const fm::FeatureMapSpec& map,
                               const std::vector<int>& hidden) {
    net::NetworkSpec spec;
    spec.input_dim = prob.input_dim;
    spec.output_dim = prob.output_dim;
    spec.feature_map = map;
    spec.hidden = hidden;
    return spec;
}

CellResult train_cell(const std::string& problem, const fm::FeatureMapSpec& map,
                      const RunShape& shape, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    CellResult cell;
    cell.problem = problem;
    cell.mapping = fm::family_name(map.family);
    cell.seed = seed;
    cell.sigma = map.sigma;
    cell.iterations = shape.tcfg.iterations;
    const auto t0 = clock::now();
    try {
        pde::PdeProblem prob = pde::make_problem(problem);
        net::NetworkSpec spec = make_net_spec(prob, map, shape.hidden);
        auto counts = net::param_count(spec);
        cell.trainable = counts.trainable + prob.inverse_coeffs.size();
        cell.frozen = counts.frozen;

        train::TrainConfig cfg = shape.tcfg;
        cfg.seed = seed;

        pde::Observations obs;
        const pde::Observations* data = nullptr;
        if (prob.is_inverse()) {
            obs = pde::gen_inverse_data(prob, shape.n_data, shape.noise_frac,
                                        stream_seed(seed, "observations"));
            data = &obs;
        }
        auto fitres = train::fit(prob, spec, cfg, shape.counts, data);

        try {
            cell.rel_l2 = rel_l2(prob, spec, fitres.params, seed);
        } catch (const MetricUnavailable&) {
            cell.rel_l2.reset();
        }
        auto stats = residual_bc_mse(prob, spec, fitres.params, seed);
        cell.residual_mse = stats.residual_mse;
        cell.bc_mse = stats.bc_mse;
        for (std::size_t k = 0; k < prob.inverse_coeffs.size(); ++k) {
            cell.coeff_names.push_back(prob.inverse_coeffs[k].name);
            cell.coeff_true.push_back(prob.inverse_coeffs[k].true_value);
            cell.coeff_values.push_back(
                fitres.params.slice("coeff." + prob.inverse_coeffs[k].name)[0]);
        }
    } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
    }
    cell.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return cell;
}

void write_cell_csv(const CellResult& cell, const std::filesystem::path& path) {
    std::vector<std::string> header = {"problem", "mapping",      "seed",
                                       "sigma",   "rel_l2",       "residual_mse",
                                       "bc_mse",  "trainable",    "frozen",
                                       "iterations"};
    for (const auto& c : cell.coeff_names) {
        header.push_back("coeff_" + c);
        header.push_back("true_" + c);
    }
    header.push_back("error");
    header.push_back("wall_seconds");
    CsvWriter w(path, header);
    std::vector<CsvCell> cells{cell.problem,
                               cell.mapping,
                               static_cast<long long>(cell.seed),
                               cell.sigma,
                               cell.rel_l2 ? CsvCell(*cell.rel_l2) : CsvCell(std::string("")),
                               cell.residual_mse,
                               cell.bc_mse,
                               static_cast<long long>(cell.trainable),
                               static_cast<long long>(cell.frozen),
                               static_cast<long long>(cell.iterations)};
    for (std::size_t k = 0; k < cell.coeff_names.size(); ++k) {
        cells.emplace_back(cell.coeff_values[k]);
        cells.emplace_back(cell.coeff_true[k]);
    }
    cells.emplace_back(cell.failed ? cell.error : std::string(""));
    cells.emplace_back(cell.wall_seconds);
    w.row(cells);
}

void write_manifest(const std::filesystem::path& outdir, const std::string& experiment,
                    const std::string& config_echo, const std::vector<std::uint64_t>& seeds) {
    std::filesystem::create_directories(outdir);
    nlohmann::json j;
    j["experiment"] = experiment;
    j["seeds"] = seeds;
    j["config"] = config_echo;
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : config_echo) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    j["config_hash"] = h;
    std::ofstream out(outdir / "manifest.json");
    out << j.dump(2) << '\n';
}

namespace {

void run_cells(std::vector<CellResult>& cells,
               const std::vector<std::pair<std::string, fm::FeatureMapSpec>>& jobs,
               const std::vector<std::uint64_t>& seeds, const RunShape& shape) {
    struct Job {
        const std::pair<std::string, fm::FeatureMapSpec>* spec;
        std::uint64_t seed;
    };
    std::vector<Job> flat;
    for (const auto& j : jobs)
        for (auto s : seeds) flat.push_back({&j, s});
    cells.resize(flat.size());
    parallel_for_index(static_cast<int>(flat.size()), worker_count(shape.threads), [&](int i) {
        cells[i] = train_cell(flat[i].spec->first, flat[i].spec->second, shape, flat[i].seed);
    });
}

double cell_score(const CellResult& c) {
    if (c.failed) return 1e300;
    return c.rel_l2 ? *c.rel_l2 : c.residual_mse + c.bc_mse;
}

}  // namespace

std::vector<CellResult> run_table1(const std::vector<std::string>& problems,
                                   const std::vector<std::string>& mappings,
                                   const std::vector<std::uint64_t>& seeds, const RunShape& shape,
                                   const std::filesystem::path& outdir) {
    std::filesystem::create_directories(outdir);
    std::vector<CellResult> all;
    CsvWriter summary(outdir / "summary.csv",
                      {"problem", "mapping", "sigma", "n_seeds", "mean_rel_l2", "std_rel_l2",
                       "mean_residual_mse", "mean_bc_mse", "best_sigma"});

    for (const auto& pname : problems) {
        pde::PdeProblem prob = pde::make_problem(pname);
        for (const auto& mname : mappings) {
            auto family = fm::parse_family(mname);
            // the paper leaves the Fourier scale open; grid-search it per problem
            std::vector<double> sigmas = {1.0};
            if (family == fm::Family::kRandomFourier || family == fm::Family::kPositionalEncoding)
                sigmas = {1.0, 5.0, 10.0};
            else if (family == fm::Family::kComplexGaussian)
                sigmas = {0.1};

            std::vector<std::vector<CellResult>> by_sigma;
            for (double sigma : sigmas) {
                std::vector<std::pair<std::string, fm::FeatureMapSpec>> jobs = {
                    {pname,
                     mapping_preset(mname, shape.feature_width, prob.input_dim, shape.k_poly,
                                    sigma)}};
                std::vector<CellResult> cells;
                run_cells(cells, jobs, seeds, shape);
                by_sigma.push_back(std::move(cells));
            }
            std::size_t best = 0;
            double best_score = 1e301;
            for (std::size_t si = 0; si < by_sigma.size(); ++si) {
                std::vector<double> scores;
                for (const auto& c : by_sigma[si]) scores.push_back(cell_score(c));
                double m = mean_of(scores);
                if (m < best_score) {
                    best_score = m;
                    best = si;
                }
            }
            for (std::size_t si = 0; si < by_sigma.size(); ++si) {
                std::vector<double> l2s;
                for (const auto& c : by_sigma[si])
                    if (!c.failed && c.rel_l2) l2s.push_back(*c.rel_l2);
                std::vector<double> rmse, bmse;
                for (const auto& c : by_sigma[si])
                    if (!c.failed) {
                        rmse.push_back(c.residual_mse);
                        bmse.push_back(c.bc_mse);
                    }
                summary.row({pname, mname, sigmas[si], static_cast<long long>(seeds.size()),
                             l2s.empty() ? CsvCell(std::string("")) : CsvCell(mean_of(l2s)),
                             l2s.empty() ? CsvCell(std::string("")) : CsvCell(stdev_of(l2s)),
                             mean_of(rmse), mean_of(bmse),
                             static_cast<long long>(si == best ? 1 : 0)});
            }
            for (const auto& c : by_sigma[best]) {
                write_cell_csv(c, outdir / (pname + "_" + mname + "_" +
                                            std::to_string(c.seed) + ".csv"));
                all.push_back(c);
            }
        }
    }
    return all;
}

std::vector<CellResult> run_scaling(int d_lo, int d_hi, const std::string& mode,
                                    const std::vector<std::string>& mappings,
                                    const std::vector<std::uint64_t>& seeds, const RunShape& shape,
                                    const std::filesystem::path& outdir) {
    std::filesystem::create_directories(outdir);
    RunShape s = shape;
    s.counts.uneven = (mode == "uneven");
    std::vector<CellResult> all;
    for (const auto& mname : mappings) {
        std::vector<std::pair<std::string, fm::FeatureMapSpec>> jobs;
        for (int d = d_lo; d <= d_hi; ++d) {
            std::string pname = "poisson-nd-" + std::to_string(d);
            jobs.emplace_back(pname,
                              mapping_preset(mname, shape.feature_width, d, shape.k_poly, 1.0));
        }
        std::vector<CellResult> cells;
        run_cells(cells, jobs, seeds, s);

        CsvWriter curve(outdir / (mname + "_" + mode + ".csv"),
                        {"dimension", "mode", "n_seeds", "mean_rel_l2", "std_rel_l2"});
        CsvWriter percell(outdir / (mname + "_" + mode + "_cells.csv"),
                          {"dimension", "mode", "seed", "rel_l2", "wall_seconds"});
        for (int d = d_lo; d <= d_hi; ++d) {
            std::string pname = "poisson-nd-" + std::to_string(d);
            std::vector<double> l2s;
            for (const auto& c : cells)
                if (c.problem == pname) {
                    if (!c.failed && c.rel_l2) l2s.push_back(*c.rel_l2);
                    percell.row({static_cast<long long>(d), mode,
                                 static_cast<long long>(c.seed),
                                 c.rel_l2 ? CsvCell(*c.rel_l2) : CsvCell(std::string("")),
                                 c.wall_seconds});
                }
            curve.row({static_cast<long long>(d), mode, static_cast<long long>(l2s.size()),
                       mean_of(l2s), stdev_of(l2s)});
        }
        all.insert(all.end(), cells.begin(), cells.end());
    }
    return all;
}

std::vector<CellResult> run_ablations(const std::string& kind, const std::string& problem,
                                      const std::vector<std::uint64_t>& seeds,
                                      const RunShape& shape,
                                      const std::filesystem::path& outdir) {
    std::filesystem::create_directories(outdir);
    pde::PdeProblem prob = pde::make_problem(problem);
    std::vector<std::pair<std::string, fm::FeatureMapSpec>> jobs;
    std::vector<std::string> labels;
    if (kind == "rbf_count") {
        for (int m : {64, 128, 256}) {
            auto spec = mapping_preset("rbf", m, prob.input_dim, shape.k_poly, 1.0);
            jobs.emplace_back(problem, spec);
            labels.push_back("m=" + std::to_string(m));
        }
    } else if (kind == "poly_count") {
        for (int k : {5, 10, 15, 20}) {
            auto spec = mapping_preset("rbf-p", shape.feature_width, prob.input_dim, k, 1.0);
            jobs.emplace_back(problem, spec);
            labels.push_back("k_poly=" + std::to_string(k));
        }
    } else if (kind == "rbf_type") {
        for (auto k : {fm::RbfKind::kCubic, fm::RbfKind::kThinPlateSpline, fm::RbfKind::kGaussian,
                       fm::RbfKind::kMultiquadric, fm::RbfKind::kInverseMultiquadric}) {
            auto spec = mapping_preset("rbf", shape.feature_width, prob.input_dim, shape.k_poly, 1.0);
            spec.rbf_kind = k;
            jobs.emplace_back(problem, spec);
            labels.push_back(std::string("kind=") + fm::rbf_kind_name(k));
        }
    } else {
        throw std::invalid_argument("unknown ablation kind: " + kind);
    }

    std::vector<CellResult> cells;
    run_cells(cells, jobs, seeds, shape);

    CsvWriter out(outdir / (kind + ".csv"),
                  {"problem", "variant", "seed", "rel_l2", "residual_mse", "bc_mse",
                   "mean_rel_l2_variant", "wall_seconds"});
    const std::size_t per = seeds.size();
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        std::vector<double> l2s;
        for (std::size_t s = 0; s < per; ++s) {
            const auto& c = cells[j * per + s];
            if (!c.failed && c.rel_l2) l2s.push_back(*c.rel_l2);
        }
        double m = mean_of(l2s);
        for (std::size_t s = 0; s < per; ++s) {
            const auto& c = cells[j * per + s];
            out.row({c.problem, labels[j], static_cast<long long>(c.seed),
                     c.rel_l2 ? CsvCell(*c.rel_l2) : CsvCell(std::string("")), c.residual_mse,
                     c.bc_mse, m, c.wall_seconds});
        }
    }
    return cells;
}

std::vector<TimingRow> run_timing(const std::vector<int>& sample_counts,
                                  const std::vector<std::string>& mappings, const RunShape& shape,
                                  const std::filesystem::path& outdir) {
    std::filesystem::create_directories(outdir);
    std::vector<TimingRow> rows;
    pde::PdeProblem prob = pde::make_problem("diffusion");
    for (const auto& mname : mappings) {
        for (int count : sample_counts) {
            auto map = mapping_preset(mname, shape.feature_width, prob.input_dim, shape.k_poly, 1.0);
            net::NetworkSpec spec = make_net_spec(prob, map, shape.hidden);
            train::TrainConfig cfg = shape.tcfg;
            cfg.seed = 0;

            net::ParamStore store = net::init_params(spec, cfg.seed);
            fm::FrozenState frozen =
                fm::init_frozen(net::seeded_feature_map(spec, cfg.seed), prob.input_dim);
            pde::SampleCounts counts;
            counts.interior = count;
            counts.per_bc = 8;
            pde::SampleSet samples = pde::sample(prob, counts, cfg.seed);

            ad::Graph g;
            net::NetGraph ng = net::build_net_graph(spec, frozen, g);
            pde::Field field{&g, ng.x, ng.outputs};
            auto res = prob.residual(field, {}, g);
            ad::BatchEval be(g, res, ng.x, ng.param_leaves);
            std::vector<double> grads(store.size());
            train::AdamState adam;

            auto one_iter = [&] {
                std::fill(grads.begin(), grads.end(), 0.0);
                be.set_params(store.values());
                double scale = 2.0 / count;
                be.forward_reverse(
                    samples.interior, count,
                    [&](const ad::BatchEval::ChunkView& view) {
                        for (int j = 0; j < be.n_outputs(); ++j)
                            for (int p = 0; p < view.count; ++p)
                                view.seed(j)[p] = scale * view.out(j)[p];
                    },
                    grads);
                train::adam_step(store.values(), grads, cfg, adam);
            };
            for (int i = 0; i < 5; ++i) one_iter();
            std::vector<double> times;
            for (int i = 0; i < 5; ++i) {
                auto t0 = std::chrono::steady_clock::now();
                one_iter();
                times.push_back(
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            }
            std::sort(times.begin(), times.end());
            rows.push_back({mname, count, times[times.size() / 2]});
        }
    }
    CsvWriter out(outdir / "timing.csv", {"mapping", "sample_count", "median_iter_seconds"});
    for (const auto& r : rows)
        out.row({r.mapping, static_cast<long long>(r.sample_count), r.seconds_per_iter});
    return rows;
}

void dump_field(const pde::PdeProblem& prob, const net::NetworkSpec& spec,
                const net::ParamStore& store, std::uint64_t seed, int resolution,
                const std::filesystem::path& path) {
    const int n = prob.input_dim;
    if (n > 3) throw std::invalid_argument("dump_field: input dimension must be <= 3");
    std::vector<double> pts;
    std::vector<int> idx(n, 0);
    std::vector<double> p(n);
    // full tensor grid, holes included so the grid shape stays rectangular
    long total = 1;
    for (int k = 0; k < n; ++k) total *= resolution;
    pts.reserve(static_cast<std::size_t>(total) * n);
    for (long i = 0; i < total; ++i) {
        long rem = i;
        for (int k = n - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(rem % resolution);
            rem /= resolution;
        }
        for (int k = 0; k < n; ++k)
            p[k] = prob.lo[k] + (prob.hi[k] - prob.lo[k]) * idx[k] / (resolution - 1.0);
        pts.insert(pts.end(), p.begin(), p.end());
    }
    const int npts = static_cast<int>(total);
    auto pred = predict(prob, spec, store, seed, pts, npts);

    std::vector<std::string> header;
    for (int k = 0; k < n; ++k) header.push_back("x" + std::to_string(k));
    for (int c = 0; c < prob.output_dim; ++c) header.push_back("u" + std::to_string(c));
    if (prob.has_reference()) {
        for (int c = 0; c < prob.output_dim; ++c) header.push_back("ref" + std::to_string(c));
        header.push_back("abs_err");
    }
    CsvWriter w(path, header);
    std::vector<double> ref(prob.output_dim);
    for (int i = 0; i < npts; ++i) {
        std::vector<CsvCell> cells;
        for (int k = 0; k < n; ++k) cells.emplace_back(pts[static_cast<std::size_t>(i) * n + k]);
        for (int c = 0; c < prob.output_dim; ++c)
            cells.emplace_back(pred[static_cast<std::size_t>(i) * prob.output_dim + c]);
        if (prob.has_reference()) {
            prob.reference(std::span<const double>(pts).subspan(static_cast<std::size_t>(i) * n, n),
                           ref);
            double err = 0.0;
            for (int c = 0; c < prob.output_dim; ++c) {
                cells.emplace_back(ref[c]);
                err = std::max(err,
                               std::fabs(pred[static_cast<std::size_t>(i) * prob.output_dim + c] -
                                         ref[c]));
            }
            cells.emplace_back(err);
        }
        w.row(cells);
    }
}

}  // namespace featlab::bench
