#include "featlab/cli/run.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "featlab/bench/experiments.hpp"
#include "featlab/net/checkpoint.hpp"
#include "featlab/train/loss.hpp"
#include "featlab/train/trainer.hpp"
#include "featlab/util/rng.hpp"

namespace featlab::cli {

namespace fs = std::filesystem;

namespace {

bench::RunShape shape_from(const RunConfig& cfg) {
    bench::RunShape shape;
    shape.hidden = cfg.hidden;
    shape.feature_width = cfg.features;
    shape.k_poly = cfg.poly;
    shape.tcfg.iterations = cfg.iters;
    shape.tcfg.lr = cfg.lr;
    shape.tcfg.lambda_r = cfg.lambda_r;
    shape.tcfg.lambda_bc = cfg.lambda_bc;
    shape.tcfg.lambda_data = cfg.lambda_data;
    shape.tcfg.resample_every = cfg.resample_every;
    shape.tcfg.coeff_lr_scale = cfg.coeff_lr_scale;
    shape.tcfg.log_every = cfg.log_every;
    shape.counts.interior = cfg.n_interior;
    shape.counts.per_bc = cfg.n_boundary;
    shape.counts.uneven = cfg.mode == "uneven";
    shape.n_data = cfg.n_data;
    shape.noise_frac = cfg.noise_pct;
    shape.threads = cfg.threads;
    return shape;
}

fm::FeatureMapSpec map_from(const RunConfig& cfg, int input_dim) {
    auto spec = bench::mapping_preset(cfg.map, cfg.features, input_dim, cfg.poly, cfg.sigma);
    spec.rbf_kind = fm::parse_rbf_kind(cfg.rbf_kind);
    return spec;
}

void write_config(const RunConfig& cfg, const fs::path& outdir) {
    fs::create_directories(outdir);
    std::ofstream out(outdir / "config.ini");
    out << cfg.resolved_ini;
}

int cmd_train(const RunConfig& cfg) {
    pde::PdeProblem prob = pde::make_problem(cfg.problem);
    auto shape = shape_from(cfg);
    auto map = map_from(cfg, prob.input_dim);
    net::NetworkSpec spec = bench::make_net_spec(prob, map, cfg.hidden);
    train::TrainConfig tcfg = shape.tcfg;
    tcfg.seed = cfg.seed;

    fs::path outdir(cfg.out);
    write_config(cfg, outdir);

    pde::Observations obs;
    const pde::Observations* data = nullptr;
    if (prob.is_inverse()) {
        obs = pde::gen_inverse_data(prob, cfg.n_data, cfg.noise_pct,
                                    stream_seed(cfg.seed, "observations"));
        pde::save_observations_csv(obs, (outdir / "observations.csv").string());
        data = &obs;
    }

    auto result = train::fit(prob, spec, tcfg, shape.counts, data);
    result.trace.to_csv(outdir / "trace.csv");
    net::save_checkpoint(result.params, outdir / "checkpoint.ckpt");

    double metric = 0.0;
    std::string metric_name;
    try {
        metric = bench::rel_l2(prob, spec, result.params, cfg.seed);
        metric_name = "rel_l2";
    } catch (const bench::MetricUnavailable&) {
        metric = bench::residual_bc_mse(prob, spec, result.params, cfg.seed).residual_mse;
        metric_name = "residual_mse";
    }
    std::printf("train problem=%s map=%s seed=%llu %s=%.6e\n", cfg.problem.c_str(),
                cfg.map.c_str(), static_cast<unsigned long long>(cfg.seed), metric_name.c_str(),
                metric);
    for (const auto& c : prob.inverse_coeffs) {
        double v = result.params.slice("coeff." + c.name)[0];
        std::printf("  coeff %s=%.6g (true %.6g)\n", c.name.c_str(), v, c.true_value);
    }
    return 0;
}

int cmd_eval(const RunConfig& cfg) {
    if (cfg.checkpoint.empty()) {
        std::fprintf(stderr, "error: eval requires --checkpoint\n");
        return 2;
    }
    pde::PdeProblem prob = pde::make_problem(cfg.problem);
    auto map = map_from(cfg, prob.input_dim);
    net::NetworkSpec spec = bench::make_net_spec(prob, map, cfg.hidden);
    net::ParamStore store = net::load_checkpoint(cfg.checkpoint);

    double metric = 0.0;
    std::string metric_name;
    try {
        metric = bench::rel_l2(prob, spec, store, cfg.seed);
        metric_name = "rel_l2";
    } catch (const bench::MetricUnavailable&) {
        metric = bench::residual_bc_mse(prob, spec, store, cfg.seed).residual_mse;
        metric_name = "residual_mse";
    }
    std::printf("eval problem=%s map=%s %s=%.6e\n", cfg.problem.c_str(), cfg.map.c_str(),
                metric_name.c_str(), metric);
    return 0;
}

int cmd_table1(const RunConfig& cfg) {
    auto shape = shape_from(cfg);
    std::vector<std::string> problems = {"wave", "diffusion", "heat", "poisson-holes", "burgers",
                                         "ns-step"};
    if (!cfg.problem.empty()) problems = {cfg.problem};
    std::vector<std::string> mappings = {"identity", "be", "pe", "ff", "sf",
                                         "ct",       "cg", "rbf", "rbf-p"};
    fs::path outdir = fs::path(cfg.out) / "table1";
    write_config(cfg, outdir);
    auto cells = bench::run_table1(problems, mappings, cfg.seeds, shape, outdir);
    bench::write_manifest(outdir, "table1", cfg.resolved_ini, cfg.seeds);
    int failures = 0;
    for (const auto& c : cells) failures += c.failed ? 1 : 0;
    std::printf("table1 cells=%zu failed=%d out=%s\n", cells.size(), failures,
                outdir.string().c_str());
    return 0;
}

int cmd_scaling(const RunConfig& cfg) {
    auto shape = shape_from(cfg);
    auto [lo, hi] = parse_dims(cfg.dims);
    fs::path outdir = fs::path(cfg.out) / "scaling";
    write_config(cfg, outdir);
    auto cells = bench::run_scaling(lo, hi, cfg.mode, {"ff", "rbf"}, cfg.seeds, shape, outdir);
    bench::write_manifest(outdir, "scaling", cfg.resolved_ini, cfg.seeds);
    std::printf("scaling dims=%d..%d mode=%s cells=%zu out=%s\n", lo, hi, cfg.mode.c_str(),
                cells.size(), outdir.string().c_str());
    return 0;
}

int cmd_ablate(const RunConfig& cfg) {
    auto shape = shape_from(cfg);
    std::string problem = cfg.problem.empty() ? "diffusion" : cfg.problem;
    fs::path outdir = fs::path(cfg.out) / "ablate";
    write_config(cfg, outdir);
    auto cells = bench::run_ablations(cfg.ablate_kind, problem, cfg.seeds, shape, outdir);
    bench::write_manifest(outdir, "ablate-" + cfg.ablate_kind, cfg.resolved_ini, cfg.seeds);
    std::printf("ablate kind=%s problem=%s cells=%zu out=%s\n", cfg.ablate_kind.c_str(),
                problem.c_str(), cells.size(), outdir.string().c_str());
    return 0;
}

int cmd_timing(const RunConfig& cfg) {
    auto shape = shape_from(cfg);
    fs::path outdir = fs::path(cfg.out) / "timing";
    write_config(cfg, outdir);
    auto rows = bench::run_timing({1000, 10000, 100000}, {"identity", "ff", "sf", "rbf", "rbf-p"},
                                  shape, outdir);
    bench::write_manifest(outdir, "timing", cfg.resolved_ini, cfg.seeds);
    std::printf("timing rows=%zu out=%s\n", rows.size(), outdir.string().c_str());
    return 0;
}

int cmd_dump(const RunConfig& cfg) {
    if (cfg.checkpoint.empty()) {
        std::fprintf(stderr, "error: dump requires --checkpoint\n");
        return 2;
    }
    pde::PdeProblem prob = pde::make_problem(cfg.problem);
    auto map = map_from(cfg, prob.input_dim);
    net::NetworkSpec spec = bench::make_net_spec(prob, map, cfg.hidden);
    net::ParamStore store = net::load_checkpoint(cfg.checkpoint);
    fs::path outdir(cfg.out);
    write_config(cfg, outdir);
    fs::path out = outdir / (cfg.problem + "_field.csv");
    bench::dump_field(prob, spec, store, cfg.seed, cfg.resolution, out);
    std::printf("dump problem=%s resolution=%d out=%s\n", cfg.problem.c_str(), cfg.resolution,
                out.string().c_str());
    return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
    try {
        if (cfg.command == "train") return cmd_train(cfg);
        if (cfg.command == "eval") return cmd_eval(cfg);
        if (cfg.command == "table1") return cmd_table1(cfg);
        if (cfg.command == "scaling") return cmd_scaling(cfg);
        if (cfg.command == "ablate") return cmd_ablate(cfg);
        if (cfg.command == "timing") return cmd_timing(cfg);
        if (cfg.command == "dump") return cmd_dump(cfg);
        std::fprintf(stderr, "error: unknown command '%s'\n", cfg.command.c_str());
        return 2;
    } catch (const train::NumericalAbort& e) {
        std::fprintf(stderr, "numerical abort: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace featlab::cli
