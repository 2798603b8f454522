#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace featlab::cli {

// Resolved run configuration; flags override config-file values. Defaults are
// the paper-scale ones (128-wide feature layer, 4x50 tanh stack).
struct RunConfig {
    std::string command;
    std::string problem;
    std::string map = "rbf";
    int features = 128;  // feature layer output width
    int poly = 10;
    std::string rbf_kind = "gaussian";
    double sigma = 1.0;
    std::string hidden_spec = "50,50,50,50";  // comma list; "" or "none" = no hidden layers
    std::vector<int> hidden = {50, 50, 50, 50};

    int iters = 20000;
    double lr = 1e-3;
    double lambda_r = 1.0;
    double lambda_bc = 1.0;
    double lambda_data = 1.0;
    int resample_every = 0;
    double coeff_lr_scale = 10.0;
    int log_every = 500;

    int n_interior = 10000;
    int n_boundary = 400;
    int n_data = 2000;
    double noise_pct = 0.0;  // fraction of per-component RMS (0.01 = 1%)

    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    std::string out = "runs";
    std::string mode = "even";
    std::string dims = "1..10";
    int resolution = 64;
    std::string checkpoint;
    std::string ablate_kind = "rbf_count";
    int threads = 0;

    std::string resolved_ini;  // full config echo written next to outputs
};

struct ParseOutcome {
    std::optional<RunConfig> config;  // empty -> exit with `status`
    int status = 0;
};

// Parses argv (and an optional --config file; flags win). Usage errors print
// to stderr and yield status 2; --help prints to stdout with status 0.
ParseOutcome parse(int argc, const char* const* argv);

std::pair<int, int> parse_dims(const std::string& dims);  // "A..B" or "A"

}  // namespace featlab::cli
