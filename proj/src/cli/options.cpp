#include "featlab/cli/options.hpp"

#include <cstdio>

#include <CLI11.hpp>

namespace featlab::cli {

std::pair<int, int> parse_dims(const std::string& dims) {
    auto pos = dims.find("..");
    if (pos == std::string::npos) {
        int d = std::stoi(dims);
        return {d, d};
    }
    int lo = std::stoi(dims.substr(0, pos));
    int hi = std::stoi(dims.substr(pos + 2));
    if (lo < 1 || hi < lo) throw CLI::ValidationError("--dims", "expected A..B with 1 <= A <= B");
    return {lo, hi};
}

ParseOutcome parse(int argc, const char* const* argv) {
    RunConfig cfg;
    CLI::App app{"pinn-featlab: feature-mapped PINN solver and benchmark harness"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file; command-line flags take precedence");
    app.allow_config_extras(false);

    const std::vector<std::string> commands = {"train",  "eval",   "table1", "scaling",
                                               "ablate", "timing", "dump"};
    for (const auto& name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->allow_config_extras(false);
        sub->configurable(true);
        sub->fallthrough(true);
        sub->add_option("--problem", cfg.problem, "problem name (see README)");
        sub->add_option("--map", cfg.map, "feature map: identity|be|pe|ff|sf|ct|cg|rbf|rbf-p");
        sub->add_option("--features", cfg.features, "feature layer output width");
        sub->add_option("--poly", cfg.poly, "polynomial term count (rbf-p)");
        sub->add_option("--rbf-kind", cfg.rbf_kind, "cubic|tps|gaussian|mq|imq");
        sub->add_option("--sigma", cfg.sigma, "feature map scale hyperparameter");
        sub->add_option("--hidden", cfg.hidden_spec,
                        "hidden layer widths, comma separated ('none' for a linear head)");
        sub->add_option("--iters", cfg.iters, "Adam iterations");
        sub->add_option("--lr", cfg.lr, "Adam learning rate");
        sub->add_option("--lambda-r", cfg.lambda_r, "residual loss weight");
        sub->add_option("--lambda-bc", cfg.lambda_bc, "boundary loss weight");
        sub->add_option("--lambda-data", cfg.lambda_data, "data loss weight");
        sub->add_option("--resample-every", cfg.resample_every, "interior resampling period");
        sub->add_option("--coeff-lr-scale", cfg.coeff_lr_scale, "lr multiplier for coefficients");
        sub->add_option("--log-every", cfg.log_every, "trace logging period");
        sub->add_option("--n-interior", cfg.n_interior, "interior collocation points");
        sub->add_option("--n-boundary", cfg.n_boundary, "boundary points per condition set");
        sub->add_option("--n-data", cfg.n_data, "observation count (inverse problems)");
        sub->add_option("--noise-pct", cfg.noise_pct,
                        "observation noise as a fraction of per-component RMS (0.01 = 1%)");
        sub->add_option("--seed", cfg.seed, "run seed");
        sub->add_option("--seeds", cfg.seeds, "seed list for multi-seed experiments")
            ->delimiter(',');
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--mode", cfg.mode, "sampling mode")
            ->check(CLI::IsMember({"even", "uneven"}));
        sub->add_option("--dims", cfg.dims, "dimension range A..B for scaling");
        sub->add_option("--resolution", cfg.resolution, "grid resolution for dump");
        sub->add_option("--checkpoint", cfg.checkpoint, "checkpoint path (eval/dump input)");
        sub->add_option("--ablate-kind", cfg.ablate_kind, "rbf_count|poly_count|rbf_type");
        sub->add_option("--threads", cfg.threads, "worker cap (default: PINN_FEATLAB_THREADS)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        (void)app.exit(e);
        return {std::nullopt, 0};
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return {std::nullopt, 2};
    }

    for (const auto& name : commands)
        if (app.got_subcommand(name)) cfg.command = name;

    const bool needs_problem = cfg.command == "train" || cfg.command == "eval" ||
                               cfg.command == "dump";
    if (needs_problem && cfg.problem.empty()) {
        std::fprintf(stderr, "error: --problem is required for '%s'\n", cfg.command.c_str());
        return {std::nullopt, 2};
    }
    try {
        cfg.hidden.clear();
        std::string spec = cfg.hidden_spec;
        if (spec != "none" && spec != "0") {
            std::size_t pos = 0;
            while (pos < spec.size()) {
                auto comma = spec.find(',', pos);
                if (comma == std::string::npos) comma = spec.size();
                std::string tok = spec.substr(pos, comma - pos);
                if (!tok.empty()) cfg.hidden.push_back(std::stoi(tok));
                pos = comma + 1;
            }
        }
        for (int h : cfg.hidden)
            if (h < 1) throw std::invalid_argument("hidden widths must be positive");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: bad --hidden value '%s'\n", cfg.hidden_spec.c_str());
        return {std::nullopt, 2};
    }

    cfg.resolved_ini = app.config_to_str(true, true);
    return {cfg, 0};
}

}  // namespace featlab::cli
