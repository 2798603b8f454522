#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "featlab/pde/burgers_oracle.hpp"
#include "featlab/pde/lorenz.hpp"
#include "featlab/pde/problem.hpp"
#include "featlab/util/csv.hpp"
#include "featlab/util/rng.hpp"

namespace featlab::pde {

SampleSet sample(const PdeProblem& prob, const SampleCounts& counts, std::uint64_t seed) {
    if (counts.interior < 1 || counts.per_bc < 1)
        throw std::invalid_argument("sample: counts must be positive");
    const int n = prob.input_dim;
    SampleSet out;
    out.input_dim = n;

    auto rng = make_rng(seed, "samples.interior");
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // uneven mode: the last axis only takes ceil(N/D) distinct values,
    // mimicking dense spatial / sparse temporal sampling
    std::vector<double> last_axis_pool;
    if (counts.uneven) {
        int k = (counts.interior + n - 1) / n;
        auto prng = make_rng(seed, "samples.last_axis_pool");
        for (int i = 0; i < k; ++i)
            last_axis_pool.push_back(prob.lo[n - 1] + (prob.hi[n - 1] - prob.lo[n - 1]) * u01(prng));
    }

    out.interior.reserve(static_cast<std::size_t>(counts.interior) * n);
    std::vector<double> pt(n);
    long attempts = 0;
    for (int i = 0; i < counts.interior;) {
        if (++attempts > 1000000)
            throw std::runtime_error("sample: rejection failed after 1e6 draws (degenerate geometry)");
        for (int k = 0; k < n; ++k) pt[k] = prob.lo[k] + (prob.hi[k] - prob.lo[k]) * u01(rng);
        if (counts.uneven) pt[n - 1] = last_axis_pool[i % last_axis_pool.size()];
        if (!prob.inside(pt)) continue;
        out.interior.insert(out.interior.end(), pt.begin(), pt.end());
        ++i;
    }

    for (std::size_t s = 0; s < prob.bc_sets.size(); ++s) {
        auto brng = make_rng(seed, "samples.bc." + prob.bc_sets[s].name);
        std::vector<double> block;
        block.reserve(static_cast<std::size_t>(counts.per_bc) * n);
        for (int i = 0; i < counts.per_bc; ++i) {
            prob.bc_sets[s].sample(brng, pt);
            block.insert(block.end(), pt.begin(), pt.end());
        }
        out.boundary.push_back(std::move(block));
    }
    return out;
}

Observations gen_inverse_data(const PdeProblem& prob, int n_points, double noise_frac,
                              std::uint64_t seed) {
    Observations obs;
    obs.input_dim = prob.input_dim;
    obs.output_dim = prob.output_dim;

    if (prob.name == "i-burgers") {
        auto rng = make_rng(seed, "data.points");
        std::uniform_real_distribution<double> ux(-1.0, 1.0), ut(0.0, 1.0);
        for (int i = 0; i < n_points; ++i) {
            double x = ux(rng), t = ut(rng);
            obs.x.push_back(x);
            obs.x.push_back(t);
            obs.u.push_back(burgers_reference(x, t));
        }
    } else if (prob.name == "i-lorenz") {
        const double h = 1e-3, t_end = prob.hi[0];
        auto traj = rk4_trajectory(LorenzParams{}, kLorenzStart, t_end, h);
        const auto m = static_cast<long>(traj.size() - 1);
        for (int i = 0; i < n_points; ++i) {
            long idx = n_points > 1 ? std::lround(static_cast<double>(i) * m / (n_points - 1)) : 0;
            obs.x.push_back(static_cast<double>(idx) * h);
            for (int c = 0; c < 3; ++c) obs.u.push_back(traj[idx][c]);
        }
    } else {
        throw std::invalid_argument("gen_inverse_data: not an inverse problem: " + prob.name);
    }

    if (noise_frac != 0.0) {
        const int d = obs.output_dim, np = obs.size();
        std::vector<double> rms(d, 0.0);
        for (int i = 0; i < np; ++i)
            for (int c = 0; c < d; ++c) rms[c] += obs.u[static_cast<std::size_t>(i) * d + c] *
                                                  obs.u[static_cast<std::size_t>(i) * d + c];
        for (int c = 0; c < d; ++c) rms[c] = std::sqrt(rms[c] / np);
        auto nrng = make_rng(seed, "data.noise");
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int i = 0; i < np; ++i)
            for (int c = 0; c < d; ++c)
                obs.u[static_cast<std::size_t>(i) * d + c] += noise_frac * rms[c] * gauss(nrng);
    }
    return obs;
}

void save_observations_csv(const Observations& obs, const std::string& path) {
    std::vector<std::string> header;
    for (int i = 0; i < obs.input_dim; ++i) header.push_back("x" + std::to_string(i));
    for (int c = 0; c < obs.output_dim; ++c) header.push_back("u" + std::to_string(c));
    CsvWriter w(path, header);
    for (int i = 0; i < obs.size(); ++i) {
        std::vector<CsvCell> cells;
        for (int k = 0; k < obs.input_dim; ++k)
            cells.emplace_back(obs.x[static_cast<std::size_t>(i) * obs.input_dim + k]);
        for (int c = 0; c < obs.output_dim; ++c)
            cells.emplace_back(obs.u[static_cast<std::size_t>(i) * obs.output_dim + c]);
        w.row(cells);
    }
}

Observations load_observations_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty observation file " + path);
    int nx = 0, nu = 0;
    {
        std::istringstream ls(line);
        std::string col;
        while (std::getline(ls, col, ',')) {
            if (col.rfind("x", 0) == 0) ++nx;
            else if (col.rfind("u", 0) == 0) ++nu;
        }
    }
    if (nx == 0 || nu == 0) throw std::runtime_error("bad observation header in " + path);
    Observations obs;
    obs.input_dim = nx;
    obs.output_dim = nu;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        int k = 0;
        while (std::getline(ls, cell, ',')) {
            double v = std::stod(cell);
            if (k < nx) obs.x.push_back(v);
            else obs.u.push_back(v);
            ++k;
        }
        if (k != nx + nu) throw std::runtime_error("ragged observation row in " + path);
    }
    return obs;
}

}  // namespace featlab::pde
