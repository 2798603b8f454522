#include <cmath>
#include <cstring>
#include <random>

#include <stdexcept>
#include <functional>

#include <doctest.h>

#include "featlab/autodiff/batch.hpp"
#include "featlab/autodiff/graph.hpp"

using namespace featlab;

namespace {

// expression exercising every op class, two inputs and three params
struct Fixture {
    ad::Graph g;
    std::vector<ad::NodeId> x, p;
    std::vector<ad::NodeId> outs;

    Fixture() {
        x = {g.input(), g.input()};
        p = {g.param(), g.param(), g.param()};
        auto a = g.mul(g.sin(g.mul(x[0], p[0])), g.cos(x[1]));
        auto b = g.div(g.exp(g.neg(g.mul(x[0], x[0]))), g.add_const(g.abs(x[1]), 1.0));
        auto c = g.tanh(g.add(g.mul(p[1], a), g.mul(p[2], b)));
        auto d = g.sqrt(g.add_const(g.mul(c, c), 1.0));
        auto e = g.max_with(g.sub(d, g.pow_real(g.add_const(g.mul(x[1], x[1]), 0.5), 1.3)), -0.25);
        outs = {c, e};
        // second-derivative content in the graph too
        outs.push_back(g.derive(g.derive(c, x[0]), x[0]));
    }
};

}  // namespace

TEST_CASE("batched forward equals scalar evaluation bit for bit") {
    Fixture f;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 1.5);

    const int npts = 300;  // forces multiple chunks
    std::vector<double> pts(npts * 2);
    for (auto& v : pts) v = u(rng);
    std::vector<double> theta = {0.73, -1.1, 0.4};

    ad::BatchEval be(f.g, f.outs, f.x, f.p);
    be.set_params(theta);
    std::vector<double> out(npts * f.outs.size());
    be.forward(pts, npts, out);

    for (int i = 0; i < npts; ++i) {
        f.g.set_value(f.x[0], pts[2 * i]);
        f.g.set_value(f.x[1], pts[2 * i + 1]);
        for (int k = 0; k < 3; ++k) f.g.set_value(f.p[k], theta[k]);
        f.g.eval();
        for (std::size_t j = 0; j < f.outs.size(); ++j) {
            double scalar = f.g.value(f.outs[j]);
            double batched = out[i * f.outs.size() + j];
            CHECK(std::memcmp(&scalar, &batched, sizeof(double)) == 0);
        }
    }
}

TEST_CASE("batched reverse accumulates the same gradients as grad_all") {
    Fixture f;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.2, 1.2);

    const int npts = 37;
    std::vector<double> pts(npts * 2);
    for (auto& v : pts) v = u(rng);
    std::vector<double> theta = {0.31, 0.9, -0.77};
    std::vector<double> seeds(npts * f.outs.size());
    for (auto& s : seeds) s = u(rng);

    ad::BatchEval be(f.g, f.outs, f.x, f.p);
    be.set_params(theta);
    std::vector<double> grads(3, 0.0);
    be.forward_reverse(
        pts, npts,
        [&](const ad::BatchEval::ChunkView& view) {
            for (std::size_t j = 0; j < f.outs.size(); ++j)
                for (int q = 0; q < view.count; ++q)
                    view.seed(static_cast<int>(j))[q] =
                        seeds[(view.first + q) * f.outs.size() + j];
        },
        grads);

    // oracle: sum over points of seed . grad_all(out)
    std::vector<double> expected(3, 0.0);
    for (int i = 0; i < npts; ++i) {
        f.g.set_value(f.x[0], pts[2 * i]);
        f.g.set_value(f.x[1], pts[2 * i + 1]);
        for (int k = 0; k < 3; ++k) f.g.set_value(f.p[k], theta[k]);
        for (std::size_t j = 0; j < f.outs.size(); ++j) {
            auto gj = f.g.grad_all(f.outs[j], f.p);
            for (int k = 0; k < 3; ++k) expected[k] += seeds[i * f.outs.size() + j] * gj[k];
        }
    }
    for (int k = 0; k < 3; ++k)
        CHECK(grads[k] == doctest::Approx(expected[k]).epsilon(1e-11));
}

TEST_CASE("uniform subgraphs are evaluated once and correctly") {
    ad::Graph g;
    auto x = g.input();
    auto p = g.param();
    auto stiff = g.exp(g.mul(p, p));  // pure-param chain
    auto out = g.mul(stiff, g.sin(x));
    ad::BatchEval be(g, {out}, {x}, {p});
    be.set_params(std::vector<double>{0.8});
    std::vector<double> pts = {0.1, 0.2, 0.3};
    std::vector<double> vals(3);
    be.forward(pts, 3, vals);
    for (int i = 0; i < 3; ++i)
        CHECK(vals[i] == doctest::Approx(std::exp(0.64) * std::sin(pts[i])).epsilon(1e-15));
}

TEST_CASE("outputs must depend on an input leaf") {
    ad::Graph g;
    auto x = g.input();
    auto p = g.param();
    auto out = g.mul(p, p);
    CHECK_THROWS_AS(ad::BatchEval(g, {out}, {x}, {p}), std::invalid_argument);
}

TEST_CASE("param leaf outside the active graph still gets a zero gradient") {
    ad::Graph g;
    auto x = g.input();
    auto p_used = g.param();
    auto p_unused = g.param();
    auto out = g.mul(p_used, x);
    ad::BatchEval be(g, {out}, {x}, {p_used, p_unused});
    be.set_params(std::vector<double>{2.0, 5.0});
    std::vector<double> pts = {1.0, 2.0};
    std::vector<double> grads(2, 0.0);
    be.forward_reverse(
        pts, 2,
        [&](const ad::BatchEval::ChunkView& view) {
            for (int q = 0; q < view.count; ++q) view.seed(0)[q] = 1.0;
        },
        grads);
    CHECK(grads[0] == doctest::Approx(3.0).epsilon(1e-15));  // x1 + x2
    CHECK(grads[1] == 0.0);
}
