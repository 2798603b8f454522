#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "featlab/bench/metrics.hpp"
#include "featlab/pde/problem.hpp"
#include "featlab/train/trainer.hpp"

namespace featlab::bench {

// desk-scale knobs shared by the experiment runners
struct RunShape {
    std::vector<int> hidden = {20, 20};
    int feature_width = 32;  // target output width of the feature layer
    int k_poly = 10;
    train::TrainConfig tcfg;
    pde::SampleCounts counts{256, 64, false};
    int n_data = 500;
    double noise_frac = 0.0;
    int threads = 0;  // 0: PINN_FEATLAB_THREADS or hardware
};

struct CellResult {
    std::string problem;
    std::string mapping;
    std::uint64_t seed = 0;
    double sigma = 0.0;
    std::optional<double> rel_l2;
    double residual_mse = 0.0;
    double bc_mse = 0.0;
    std::vector<std::string> coeff_names;
    std::vector<double> coeff_values, coeff_true;
    std::size_t trainable = 0, frozen = 0;
    int iterations = 0;
    double wall_seconds = 0.0;
    bool failed = false;
    std::string error;
};

// Feature-map spec whose apply() output is `width` wide for this input
// dimension (ff: width/2 frequencies, be/pe: width/(2n) ladder steps, ...).
fm::FeatureMapSpec mapping_preset(const std::string& name, int width, int n, int k_poly,
                                  double sigma);

net::NetworkSpec make_net_spec(const pde::PdeProblem& prob, const fm::FeatureMapSpec& map,
                               const std::vector<int>& hidden);

// Train one (problem, mapping, seed) cell and evaluate it. Never throws:
// failures land in CellResult::error.
CellResult train_cell(const std::string& problem, const fm::FeatureMapSpec& map,
                      const RunShape& shape, std::uint64_t seed);

std::vector<CellResult> run_table1(const std::vector<std::string>& problems,
                                   const std::vector<std::string>& mappings,
                                   const std::vector<std::uint64_t>& seeds, const RunShape& shape,
                                   const std::filesystem::path& outdir);

std::vector<CellResult> run_scaling(int d_lo, int d_hi, const std::string& mode,
                                    const std::vector<std::string>& mappings,
                                    const std::vector<std::uint64_t>& seeds, const RunShape& shape,
                                    const std::filesystem::path& outdir);

std::vector<CellResult> run_ablations(const std::string& kind, const std::string& problem,
                                      const std::vector<std::uint64_t>& seeds,
                                      const RunShape& shape,
                                      const std::filesystem::path& outdir);

struct TimingRow {
    std::string mapping;
    int sample_count = 0;
    double seconds_per_iter = 0.0;
};
std::vector<TimingRow> run_timing(const std::vector<int>& sample_counts,
                                  const std::vector<std::string>& mappings, const RunShape& shape,
                                  const std::filesystem::path& outdir);

// CSV grid dump: coordinates, predictions, reference + |error| when available
void dump_field(const pde::PdeProblem& prob, const net::NetworkSpec& spec,
                const net::ParamStore& store, std::uint64_t seed, int resolution,
                const std::filesystem::path& path);

void write_cell_csv(const CellResult& cell, const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& outdir, const std::string& experiment,
                    const std::string& config_echo, const std::vector<std::uint64_t>& seeds);

}  // namespace featlab::bench
