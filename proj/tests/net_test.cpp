#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "featlab/net/checkpoint.hpp"
#include "featlab/net/network.hpp"
#include "support/finite_diff.hpp"

using namespace featlab;
using featlab::testing::central_diff;
using featlab::testing::central_diff2;
using featlab::testing::close;

namespace {

net::NetworkSpec small_spec(fm::Family fam, int m, std::vector<int> hidden, int n = 2,
                            int out = 1, double sigma = 1.0, int k_poly = 3) {
    net::NetworkSpec s;
    s.input_dim = n;
    s.output_dim = out;
    s.hidden = std::move(hidden);
    s.feature_map.family = fam;
    s.feature_map.m = m;
    s.feature_map.sigma = sigma;
    s.feature_map.k_poly = k_poly;
    s.feature_map.seed = 9;
    return s;
}

struct Built {
    ad::Graph g;
    net::NetGraph ng;
    net::ParamStore store;

    explicit Built(const net::NetworkSpec& spec, std::uint64_t seed = 5,
                   std::span<const net::CoeffSpec> coeffs = {})
        : store(net::init_params(spec, seed, coeffs)) {
        auto frozen = fm::init_frozen(net::seeded_feature_map(spec, seed), spec.input_dim);
        ng = net::build_net_graph(spec, frozen, g, coeffs);
    }

    void load(std::span<const double> x) {
        for (std::size_t i = 0; i < ng.x.size(); ++i) g.set_value(ng.x[i], x[i]);
        auto v = store.values();
        for (std::size_t i = 0; i < ng.param_leaves.size(); ++i)
            g.set_value(ng.param_leaves[i], v[i]);
        g.eval();
    }
};

}  // namespace

TEST_CASE("param_count") {
    SUBCASE("ff default configuration counts 14151 trainable") {
        net::NetworkSpec spec;  // defaults: hidden 4x50, output 1
        spec.input_dim = 2;
        spec.feature_map.family = fm::Family::kRandomFourier;
        spec.feature_map.m = 64;  // 128-wide feature layer
        auto c = net::param_count(spec);
        CHECK(c.trainable == 14151);
        CHECK(c.frozen == 128);  // 64 x 2 frequency matrix
    }
    SUBCASE("identity map, n=1, hidden [1] -> 4") {
        auto spec = small_spec(fm::Family::kIdentity, 1, {1}, 1);
        auto c = net::param_count(spec);
        CHECK(c.trainable == 4);
        CHECK(c.frozen == 0);
    }
    SUBCASE("rbf-p adds centers, widths and a wider first affine") {
        auto base = small_spec(fm::Family::kRbf, 16, {10}, 2);
        auto withp = small_spec(fm::Family::kRbfP, 16, {10}, 2, 1, 1.0, 4);
        auto cb = net::param_count(base);
        auto cp = net::param_count(withp);
        // +k_poly columns in the first affine layer
        CHECK(cp.trainable == cb.trainable + 4 * 10);
        // and rbf state sits on top of the affine stack
        net::NetworkSpec bare = base;
        bare.feature_map.family = fm::Family::kSinusoidal;  // same width, different state
        auto cs = net::param_count(bare);
        CHECK(cb.trainable == cs.trainable - (16 * 2 + 16) + (16 * 2 + 16));
    }
    SUBCASE("trainable count equals store length") {
        for (auto fam : {fm::Family::kIdentity, fm::Family::kRandomFourier, fm::Family::kRbf,
                         fm::Family::kRbfP, fm::Family::kSinusoidal, fm::Family::kComplexGaussian}) {
            auto spec = small_spec(fam, 9, {8, 8}, 2, 1, 0.5);
            auto store = net::init_params(spec, 3);
            CHECK(net::param_count(spec).trainable == store.size());
        }
    }
}

TEST_CASE("init_params") {
    SUBCASE("deterministic per seed") {
        auto spec = small_spec(fm::Family::kRbf, 12, {10, 10});
        auto a = net::init_params(spec, 42);
        auto b = net::init_params(spec, 42);
        REQUIRE(a.size() == b.size());
        CHECK(std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0);
        auto c = net::init_params(spec, 43);
        CHECK(std::memcmp(a.values().data(), c.values().data(), a.size() * sizeof(double)) != 0);
    }
    SUBCASE("biases are zero at init") {
        auto spec = small_spec(fm::Family::kSinusoidal, 8, {6, 6});
        auto store = net::init_params(spec, 1);
        for (double v : store.slice("layer0.bias")) CHECK(v == 0.0);
        for (double v : store.slice("layer1.bias")) CHECK(v == 0.0);
        for (double v : store.slice("head.bias")) CHECK(v == 0.0);
    }
    SUBCASE("glorot-uniform spread") {
        net::NetworkSpec spec = small_spec(fm::Family::kIdentity, 1, {}, 100, 100);
        auto store = net::init_params(spec, 7);
        auto w = store.slice("head.weight");  // 100x100 = 1e4 draws
        REQUIRE(w.size() == 10000);
        double bound = std::sqrt(6.0 / 200.0), s2 = 0.0;
        for (double v : w) {
            CHECK(std::fabs(v) <= bound);
            s2 += v * v;
        }
        double stdev = std::sqrt(s2 / static_cast<double>(w.size()));
        CHECK(stdev == doctest::Approx(bound / std::sqrt(3.0)).epsilon(0.1));
    }
}

TEST_CASE("forward") {
    SUBCASE("zero weights leave only the head bias") {
        auto spec = small_spec(fm::Family::kRbf, 6, {5});
        Built b(spec);
        std::fill(b.store.values().begin(), b.store.values().end(), 0.0);
        // zero log-widths are valid (sigma = 1); set the head bias
        b.store.slice("head.bias")[0] = 0.73;
        double x[2] = {0.4, -0.1};
        b.load(std::span<const double>(x, 2));
        CHECK(b.g.value(b.ng.outputs[0]) == 0.73);
    }
    SUBCASE("deterministic") {
        auto spec = small_spec(fm::Family::kRandomFourier, 8, {10});
        Built b1(spec), b2(spec);
        double x[2] = {0.2, 0.6};
        b1.load(std::span<const double>(x, 2));
        b2.load(std::span<const double>(x, 2));
        double v1 = b1.g.value(b1.ng.outputs[0]), v2 = b2.g.value(b2.ng.outputs[0]);
        CHECK(std::memcmp(&v1, &v2, sizeof(double)) == 0);
    }
    SUBCASE("hand-set identity net computes tanh(x)") {
        auto spec = small_spec(fm::Family::kIdentity, 1, {1}, 1);
        Built b(spec);
        b.store.slice("layer0.weight")[0] = 1.0;
        b.store.slice("layer0.bias")[0] = 0.0;
        b.store.slice("head.weight")[0] = 1.0;
        b.store.slice("head.bias")[0] = 0.0;
        double x = 0.31;
        b.load(std::span<const double>(&x, 1));
        CHECK(b.g.value(b.ng.outputs[0]) == doctest::Approx(std::tanh(0.31)).epsilon(1e-15));
        // second input derivative at 0 vanishes: tanh''(0) = 0
        auto d2 = b.ng.d2(0, 0, 0);
        x = 0.0;
        b.load(std::span<const double>(&x, 1));
        CHECK(b.g.value(d2) == 0.0);
    }
}

TEST_CASE("network gradients match finite differences for every family") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (auto fam : {fm::Family::kIdentity, fm::Family::kBasicEncoding,
                     fm::Family::kPositionalEncoding, fm::Family::kRandomFourier,
                     fm::Family::kSinusoidal, fm::Family::kComplexTriangle,
                     fm::Family::kComplexGaussian, fm::Family::kRbf, fm::Family::kRbfP}) {
        CAPTURE(fm::family_name(fam));
        auto spec = small_spec(fam, 5, {6}, 2, 1, fam == fm::Family::kComplexGaussian ? 0.4 : 2.0);
        Built b(spec);
        std::vector<double> theta(b.store.values().begin(), b.store.values().end());
        for (int pt = 0; pt < 5; ++pt) {
            double x[2] = {u(rng), u(rng)};
            b.load(std::span<const double>(x, 2));
            auto grads = b.g.grad_all(b.ng.outputs[0], b.ng.param_leaves);
            // probe a spread of parameters
            for (std::size_t k = 0; k < b.store.size(); k += std::max<std::size_t>(1, b.store.size() / 7)) {
                auto f = [&](double v) {
                    b.store.values()[k] = v;
                    b.load(std::span<const double>(x, 2));
                    double r = b.g.value(b.ng.outputs[0]);
                    b.store.values()[k] = theta[k];
                    return r;
                };
                double fd = central_diff(f, theta[k]);
                if (std::fabs(fd) < 1e-10 && std::fabs(grads[k]) < 1e-10) continue;
                CHECK_MESSAGE(close(grads[k], fd, 1e-7, 1e-5),
                              fm::family_name(fam) << " param " << k << ": " << grads[k] << " vs "
                                                   << fd);
            }
        }
    }
}

TEST_CASE("output is C2 in x for the smooth families") {
    std::mt19937_64 rng(57);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    for (auto fam : {fm::Family::kRbf, fm::Family::kRandomFourier, fm::Family::kSinusoidal,
                     fm::Family::kPositionalEncoding, fm::Family::kBasicEncoding}) {
        CAPTURE(fm::family_name(fam));
        auto spec = small_spec(fam, 4, {6}, 2);
        Built b(spec);
        auto d2 = b.ng.d2(0, 0, 0);
        for (int pt = 0; pt < 4; ++pt) {
            double x[2] = {u(rng), u(rng)};
            auto f = [&](double v) {
                double q[2] = {v, x[1]};
                b.load(std::span<const double>(q, 2));
                return b.g.value(b.ng.outputs[0]);
            };
            double fd = central_diff2(f, x[0]);
            b.load(std::span<const double>(x, 2));
            double an = b.g.value(d2);
            if (std::fabs(fd) < 1e-6) continue;
            CHECK_MESSAGE(close(an, fd, 1e-8, 1e-4), fm::family_name(fam) << ": " << an << " vs " << fd);
        }
    }
}

TEST_CASE("multi-output heads and coefficient leaves") {
    net::CoeffSpec coeffs[] = {{"alpha", 1.5}, {"beta", -0.5}};
    auto spec = small_spec(fm::Family::kRbf, 6, {8}, 1, 3);
    Built b(spec, 5, coeffs);
    CHECK(b.ng.outputs.size() == 3);
    CHECK(b.ng.coeff_leaves.size() == 2);
    CHECK(b.store.slice("coeff.alpha")[0] == 1.5);
    CHECK(b.store.slice("coeff.beta")[0] == -0.5);
    CHECK(b.store.size() == net::param_count(spec).trainable + 2);
}

TEST_CASE("checkpoint round-trip") {
    auto spec = small_spec(fm::Family::kRbfP, 7, {9, 4}, 2);
    auto store = net::init_params(spec, 77);
    auto path = std::filesystem::temp_directory_path() / "featlab_ckpt_test.ckpt";
    net::save_checkpoint(store, path);
    auto loaded = net::load_checkpoint(path);
    REQUIRE(loaded.size() == store.size());
    CHECK(std::memcmp(loaded.values().data(), store.values().data(),
                      store.size() * sizeof(double)) == 0);
    REQUIRE(loaded.slices().size() == store.slices().size());
    for (std::size_t i = 0; i < store.slices().size(); ++i) {
        CHECK(loaded.slices()[i].name == store.slices()[i].name);
        CHECK(loaded.slices()[i].offset == store.slices()[i].offset);
        CHECK(loaded.slices()[i].len == store.slices()[i].len);
    }
    std::filesystem::remove(path);
}

TEST_CASE("store slice lookup") {
    auto spec = small_spec(fm::Family::kRbf, 4, {3});
    auto store = net::init_params(spec, 0);
    CHECK(store.has("featmap.centers"));
    CHECK(!store.has("nope"));
    CHECK_THROWS_AS(store.slice("nope"), std::invalid_argument);
    std::size_t total = 0;
    for (const auto& s : store.slices()) total += s.len;
    CHECK(total == store.size());
}
