#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>

#include "featlab/bench/metrics.hpp"
#include "featlab/cli/options.hpp"
#include "featlab/cli/run.hpp"
#include "featlab/net/checkpoint.hpp"
#include "featlab/pde/problem.hpp"

using namespace featlab;
namespace fs = std::filesystem;

namespace {

cli::ParseOutcome parse_line(std::initializer_list<const char*> args) {
    std::vector<const char*> argv = {"pinn-featlab"};
    argv.insert(argv.end(), args.begin(), args.end());
    return cli::parse(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() /
                     ("featlab_cli_" + std::to_string(std::random_device{}()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string file_text(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("parse") {
    SUBCASE("flags land in the config") {
        auto out = parse_line({"train", "--problem", "burgers", "--map", "rbf-p", "--poly", "20",
                               "--seed", "0"});
        REQUIRE(out.config.has_value());
        CHECK(out.config->command == "train");
        CHECK(out.config->problem == "burgers");
        CHECK(out.config->map == "rbf-p");
        CHECK(out.config->poly == 20);
        CHECK(out.config->seed == 0);
    }
    SUBCASE("empty args is a usage error with status 2") {
        auto out = parse_line({});
        CHECK(!out.config.has_value());
        CHECK(out.status == 2);
    }
    SUBCASE("unknown flag rejected") {
        auto out = parse_line({"train", "--problem", "wave", "--nonsense", "3"});
        CHECK(!out.config.has_value());
        CHECK(out.status == 2);
    }
    SUBCASE("missing problem rejected for train") {
        auto out = parse_line({"train", "--map", "rbf"});
        CHECK(!out.config.has_value());
        CHECK(out.status == 2);
    }
    SUBCASE("invalid enum value rejected") {
        auto out = parse_line({"scaling", "--mode", "sideways"});
        CHECK(!out.config.has_value());
        CHECK(out.status == 2);
    }
    SUBCASE("hidden list and seeds parse with commas") {
        auto out = parse_line({"train", "--problem", "wave", "--hidden", "24,16", "--seeds",
                               "3,4,5"});
        REQUIRE(out.config.has_value());
        CHECK(out.config->hidden == std::vector<int>{24, 16});
        CHECK(out.config->seeds == std::vector<std::uint64_t>{3, 4, 5});
    }
    SUBCASE("dims ranges") {
        CHECK(cli::parse_dims("1..10") == std::pair{1, 10});
        CHECK(cli::parse_dims("4") == std::pair{4, 4});
    }
    SUBCASE("config file values are overridden by flags") {
        TempDir tmp;
        auto ini = tmp.path / "run.ini";
        {
            std::ofstream out(ini);
            out << "[train]\n";
            out << "problem=diffusion\n";
            out << "iters=77\n";
            out << "lr=0.5\n";
        }
        auto with_file = parse_line({"train", "--config", ini.string().c_str()});
        REQUIRE(with_file.config.has_value());
        CHECK(with_file.config->problem == "diffusion");
        CHECK(with_file.config->iters == 77);
        CHECK(with_file.config->lr == 0.5);

        auto flag_wins = parse_line(
            {"train", "--config", ini.string().c_str(), "--iters", "5", "--problem", "wave"});
        REQUIRE(flag_wins.config.has_value());
        CHECK(flag_wins.config->iters == 5);
        CHECK(flag_wins.config->problem == "wave");
        CHECK(flag_wins.config->lr == 0.5);  // file value survives where no flag given
    }
    SUBCASE("unknown config-file key rejected") {
        TempDir tmp;
        auto ini = tmp.path / "bad.ini";
        {
            std::ofstream out(ini);
            out << "[train]\nproblem=wave\nwhatisthis=1\n";
        }
        auto out = parse_line({"train", "--config", ini.string().c_str()});
        CHECK(!out.config.has_value());
        CHECK(out.status == 2);
    }
}

TEST_CASE("run: train writes outputs and eval reproduces the metric") {
    TempDir tmp;
    auto out = parse_line({"train", "--problem", "poisson-nd-1", "--map", "rbf", "--features",
                           "8", "--hidden", "6", "--iters", "30", "--n-interior", "24",
                           "--n-boundary", "8", "--log-every", "10", "--seed", "3", "--out",
                           (tmp.path / "run").string().c_str()});
    REQUIRE(out.config.has_value());
    CHECK(cli::run(*out.config) == 0);
    CHECK(fs::exists(tmp.path / "run" / "trace.csv"));
    CHECK(fs::exists(tmp.path / "run" / "checkpoint.ckpt"));
    CHECK(fs::exists(tmp.path / "run" / "config.ini"));

    auto ev = parse_line({"eval", "--problem", "poisson-nd-1", "--map", "rbf", "--features", "8",
                          "--hidden", "6", "--seed", "3", "--checkpoint",
                          (tmp.path / "run" / "checkpoint.ckpt").string().c_str()});
    REQUIRE(ev.config.has_value());
    CHECK(cli::run(*ev.config) == 0);
}

TEST_CASE("run: eval on a hand-set exact wave checkpoint scores < 1e-9") {
    TempDir tmp;
    // exact wave solution with a 4-frequency sinusoidal map and linear head
    net::NetworkSpec spec;
    spec.input_dim = 2;
    spec.output_dim = 1;
    spec.hidden = {};
    spec.feature_map.family = fm::Family::kSinusoidal;
    spec.feature_map.m = 4;
    auto store = net::init_params(spec, 0);
    auto W = store.slice("featmap.W");
    auto b = store.slice("featmap.b");
    auto head = store.slice("head.weight");
    store.slice("head.bias")[0] = 0.0;
    const double rows[4][2] = {{0.5, 1.0}, {0.5, -1.0}, {2.0, 4.0}, {2.0, -4.0}};
    for (int k = 0; k < 4; ++k) {
        W[2 * k] = rows[k][0];
        W[2 * k + 1] = rows[k][1];
        b[k] = 0.0;
    }
    head[0] = head[1] = 0.5;
    head[2] = head[3] = 0.25;
    auto ckpt = tmp.path / "wave_exact.ckpt";
    net::save_checkpoint(store, ckpt);

    auto ev = parse_line({"eval", "--problem", "wave", "--map", "sf", "--features", "4",
                          "--hidden", "", "--seed", "0", "--checkpoint",
                          ckpt.string().c_str()});
    REQUIRE(ev.config.has_value());
    // --hidden "" parses to an empty layer list
    REQUIRE(ev.config->hidden.empty());
    CHECK(cli::run(*ev.config) == 0);

    // and the metric itself
    auto prob = pde::make_problem("wave");
    CHECK(bench::rel_l2(prob, spec, store, 0) < 1e-9);
}

TEST_CASE("run: output directory is created and reruns match byte-for-byte") {
    TempDir tmp;
    auto line = [&](const char* sub) {
        return parse_line({"train", "--problem", "diffusion", "--map", "rbf", "--features", "8",
                           "--hidden", "6", "--iters", "25", "--n-interior", "16",
                           "--n-boundary", "6", "--log-every", "5", "--seed", "1", "--out",
                           (tmp.path / sub).string().c_str()});
    };
    auto a = line("deep/nested/a");
    REQUIRE(a.config.has_value());
    CHECK(cli::run(*a.config) == 0);
    CHECK(fs::exists(tmp.path / "deep/nested/a"));

    auto b = line("deep/nested/b");
    REQUIRE(b.config.has_value());
    CHECK(cli::run(*b.config) == 0);

    // traces must agree except the wall-clock column (last)
    auto strip_wall = [](const std::string& text) {
        std::istringstream in(text);
        std::ostringstream out;
        std::string line;
        while (std::getline(in, line)) {
            auto pos = line.rfind(',');
            out << line.substr(0, pos) << '\n';
        }
        return out.str();
    };
    CHECK(strip_wall(file_text(tmp.path / "deep/nested/a/trace.csv")) ==
          strip_wall(file_text(tmp.path / "deep/nested/b/trace.csv")));
    CHECK(file_text(tmp.path / "deep/nested/a/checkpoint.ckpt") ==
          file_text(tmp.path / "deep/nested/b/checkpoint.ckpt"));
}

TEST_CASE("run: unknown problem yields a configuration error") {
    auto out = parse_line({"train", "--problem", "warp-drive"});
    REQUIRE(out.config.has_value());
    CHECK(cli::run(*out.config) == 2);
}
