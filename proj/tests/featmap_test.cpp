#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "featlab/autodiff/batch.hpp"
#include "featlab/featmap/feature_map.hpp"
#include "support/finite_diff.hpp"
#include "support/jacobi_eigen.hpp"

using namespace featlab;
using featlab::testing::central_diff;
using featlab::testing::close;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct BuiltMap {
    ad::Graph g;
    std::vector<ad::NodeId> x;
    std::vector<ad::NodeId> leaves;
    std::vector<double> leaf_values;
    fm::FrozenState frozen;
    std::vector<ad::NodeId> feats;

    BuiltMap(const fm::FeatureMapSpec& spec, int n) {
        x.resize(n);
        for (auto& xi : x) xi = g.input();
        frozen = fm::init_frozen(spec, n);
        leaf_values = fm::init_trainable(spec, n);
        leaves.resize(leaf_values.size());
        for (auto& l : leaves) l = g.param();
        feats = fm::apply(spec, n, frozen, leaves, x, g);
    }

    std::vector<double> eval_at(std::span<const double> pt) {
        for (std::size_t i = 0; i < x.size(); ++i) g.set_value(x[i], pt[i]);
        for (std::size_t i = 0; i < leaves.size(); ++i) g.set_value(leaves[i], leaf_values[i]);
        g.eval();
        std::vector<double> out;
        out.reserve(feats.size());
        for (auto f : feats) out.push_back(g.value(f));
        return out;
    }
};

fm::FeatureMapSpec spec_of(fm::Family fam, int m, double sigma = 1.0, int k_poly = 0,
                           fm::RbfKind kind = fm::RbfKind::kGaussian, std::uint64_t seed = 3) {
    fm::FeatureMapSpec s;
    s.family = fam;
    s.m = m;
    s.sigma = sigma;
    s.k_poly = k_poly;
    s.rbf_kind = kind;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("output widths per family") {
    const int n = 2;
    CHECK(fm::output_width(spec_of(fm::Family::kIdentity, 7), n) == 2);
    CHECK(fm::output_width(spec_of(fm::Family::kBasicEncoding, 6), n) == 24);
    CHECK(fm::output_width(spec_of(fm::Family::kPositionalEncoding, 6, 10.0), n) == 24);
    CHECK(fm::output_width(spec_of(fm::Family::kRandomFourier, 6), n) == 12);
    CHECK(fm::output_width(spec_of(fm::Family::kSinusoidal, 6), n) == 6);
    CHECK(fm::output_width(spec_of(fm::Family::kComplexTriangle, 6), n) == 12);
    // cg: p = ceil(sqrt(6)) = 3 bumps per dim -> 9 features
    CHECK(fm::output_width(spec_of(fm::Family::kComplexGaussian, 6, 0.1), n) == 9);
    CHECK(fm::output_width(spec_of(fm::Family::kRbf, 6), n) == 6);
    CHECK(fm::output_width(spec_of(fm::Family::kRbfP, 6, 1.0, 3), n) == 9);
}

TEST_CASE("complex gaussian dimension guard") {
    // p = ceil(1000^(1/2)) = 32 -> 32^2 = 1024 fine; in 4-D 32^4 explodes
    CHECK_NOTHROW(fm::output_width(spec_of(fm::Family::kComplexGaussian, 1000, 0.1), 2));
    CHECK_THROWS_AS(fm::output_width(spec_of(fm::Family::kComplexGaussian, 100000, 0.1), 4),
                    std::invalid_argument);
}

TEST_CASE("rbf feature at its own center dominates and the block sums to 1") {
    auto spec = spec_of(fm::Family::kRbf, 4);
    BuiltMap bm(spec, 2);
    // move center 0 to the probe point and push the rest far away
    bm.leaf_values[0] = 0.3;
    bm.leaf_values[1] = -0.2;
    for (int i = 1; i < 4; ++i) {
        bm.leaf_values[2 * i] = 40.0 + i;
        bm.leaf_values[2 * i + 1] = -35.0;
    }
    double pt[2] = {0.3, -0.2};
    auto f = bm.eval_at(std::span<const double>(pt, 2));
    CHECK(f[0] == doctest::Approx(1.0).epsilon(1e-12));
    double sum = f[0] + f[1] + f[2] + f[3];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalization: rbf block sums to 1 for every kind") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (auto kind : {fm::RbfKind::kCubic, fm::RbfKind::kThinPlateSpline, fm::RbfKind::kGaussian,
                      fm::RbfKind::kMultiquadric, fm::RbfKind::kInverseMultiquadric}) {
        CAPTURE(fm::rbf_kind_name(kind));
        auto spec = spec_of(fm::Family::kRbfP, 16, 1.0, 4, kind);
        BuiltMap bm(spec, 2);
        for (int rep = 0; rep < 250; ++rep) {
            double pt[2] = {u(rng), u(rng)};
            auto f = bm.eval_at(std::span<const double>(pt, 2));
            double sum = 0.0;
            for (int i = 0; i < 16; ++i) sum += f[i];
            CHECK(std::fabs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("radial profiles depend on |x - c| only") {
    for (auto kind : {fm::RbfKind::kCubic, fm::RbfKind::kThinPlateSpline, fm::RbfKind::kGaussian,
                      fm::RbfKind::kMultiquadric, fm::RbfKind::kInverseMultiquadric}) {
        CAPTURE(fm::rbf_kind_name(kind));
        auto spec = spec_of(fm::Family::kRbf, 2, 1.0, 0, kind);
        BuiltMap bm(spec, 1);
        if (kind == fm::RbfKind::kGaussian)  // equal widths so only |x-c| matters
            bm.leaf_values[2] = bm.leaf_values[3] = 0.1;
        // centers equidistant from the probe on opposite sides
        bm.leaf_values[0] = 0.47 - 0.8;
        bm.leaf_values[1] = 0.47 + 0.8;
        double x0 = 0.47;
        auto f = bm.eval_at(std::span<const double>(&x0, 1));
        CHECK(f[0] == f[1]);
        // mirroring probe and centers through the origin is bit-identical
        bm.leaf_values[0] = -(0.47 - 0.8);
        bm.leaf_values[1] = -(0.47 + 0.8);
        double x1 = -0.47;
        auto fm_ = bm.eval_at(std::span<const double>(&x1, 1));
        CHECK(f[0] == fm_[0]);
        CHECK(f[1] == fm_[1]);
    }
}

TEST_CASE("thin plate spline value at r=0 is 0") {
    auto spec = spec_of(fm::Family::kRbf, 2, 1.0, 0, fm::RbfKind::kThinPlateSpline);
    BuiltMap bm(spec, 1);
    bm.leaf_values = {0.25, -1.75};  // second center at r=2 where phi > 0
    double pt = 0.25;  // exactly on center 0
    auto f = bm.eval_at(std::span<const double>(&pt, 1));
    CHECK(f[0] == 0.0);  // phi(0)/sum with phi(0)=0
    CHECK(f[1] == 1.0);
}

TEST_CASE("rbf-p monomial tail") {
    SUBCASE("1-D: (1, x, x^2) at x=0.5") {
        auto spec = spec_of(fm::Family::kRbfP, 2, 1.0, 3);
        BuiltMap bm(spec, 1);
        double pt = 0.5;
        auto f = bm.eval_at(std::span<const double>(&pt, 1));
        CHECK(f[2] == 1.0);
        CHECK(f[3] == 0.5);
        CHECK(f[4] == 0.25);
    }
    SUBCASE("graded lexicographic order in 2-D") {
        auto e = fm::monomial_exponents(2, 6);
        CHECK(e[0] == std::vector<int>{0, 0});
        CHECK(e[1] == std::vector<int>{1, 0});
        CHECK(e[2] == std::vector<int>{0, 1});
        CHECK(e[3] == std::vector<int>{2, 0});
        CHECK(e[4] == std::vector<int>{1, 1});
        CHECK(e[5] == std::vector<int>{0, 2});
    }
    SUBCASE("polynomial tail is not normalized") {
        auto spec = spec_of(fm::Family::kRbfP, 2, 1.0, 2);
        BuiltMap bm(spec, 1);
        double pt = 3.0;
        auto f = bm.eval_at(std::span<const double>(&pt, 1));
        CHECK(f[3] == 3.0);  // raw monomial, outside the quotient
    }
}

TEST_CASE("random fourier identity: phi(x) . phi(y) = sum cos(2 pi sigma b (x-y))") {
    auto spec = spec_of(fm::Family::kRandomFourier, 1, 1.0, 0);
    BuiltMap bm(spec, 1);
    double b = bm.frozen.freq[0];
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        double xv = u(rng), yv = u(rng);
        auto fx = bm.eval_at(std::span<const double>(&xv, 1));
        auto fy = bm.eval_at(std::span<const double>(&yv, 1));
        double dot = fx[0] * fy[0] + fx[1] * fy[1];
        CHECK(dot == doctest::Approx(std::cos(kTwoPi * b * (xv - yv))).epsilon(1e-12));
    }
}

TEST_CASE("init") {
    SUBCASE("same seed gives bit-identical state") {
        auto spec = spec_of(fm::Family::kRbf, 16);
        auto a = fm::init_trainable(spec, 3);
        auto b = fm::init_trainable(spec, 3);
        CHECK(a == b);
        auto sf = spec_of(fm::Family::kSinusoidal, 8);
        CHECK(fm::init_trainable(sf, 2) == fm::init_trainable(sf, 2));
        auto ff = spec_of(fm::Family::kRandomFourier, 8);
        CHECK(fm::init_frozen(ff, 2).freq == fm::init_frozen(ff, 2).freq);
    }
    SUBCASE("trainability partition") {
        // trainable: sf (W, b), rbf (centers, widths); frozen: ff only
        CHECK(fm::trainable_count(spec_of(fm::Family::kRandomFourier, 8), 2) == 0);
        CHECK(fm::frozen_count(spec_of(fm::Family::kRandomFourier, 8), 2) == 16);
        CHECK(fm::trainable_count(spec_of(fm::Family::kSinusoidal, 8), 2) == 24);
        CHECK(fm::trainable_count(spec_of(fm::Family::kRbf, 8), 2) == 24);
        CHECK(fm::trainable_count(
                  spec_of(fm::Family::kRbf, 8, 1.0, 0, fm::RbfKind::kCubic), 2) == 16);
        for (auto fam : {fm::Family::kIdentity, fm::Family::kBasicEncoding,
                         fm::Family::kPositionalEncoding, fm::Family::kComplexTriangle,
                         fm::Family::kComplexGaussian}) {
            CHECK(fm::trainable_count(spec_of(fam, 8, 2.0), 2) == 0);
            CHECK(fm::frozen_count(spec_of(fam, 8, 2.0), 2) == 0);
        }
    }
    SUBCASE("rbf centers form an m x n matrix") {
        auto spec = spec_of(fm::Family::kRbf, 128);
        auto slices = fm::trainable_slices(spec, 2);
        REQUIRE(slices.size() == 2);
        CHECK(slices[0].name == "featmap.centers");
        CHECK(slices[0].len == 256);
        CHECK(slices[1].name == "featmap.log_widths");
        CHECK(slices[1].len == 128);
    }
    SUBCASE("sf init bound") {
        auto spec = spec_of(fm::Family::kSinusoidal, 64);
        auto v = fm::init_trainable(spec, 4);
        double bound = std::sqrt(1.0 / 4.0);
        for (double w : v) CHECK(std::fabs(w) <= bound);
    }
    SUBCASE("rbf widths positive via log storage") {
        auto spec = spec_of(fm::Family::kRbf, 32);
        auto v = fm::init_trainable(spec, 2);
        for (std::size_t i = 64; i < v.size(); ++i) {
            double sigma = std::exp(v[i]);
            CHECK(sigma >= 0.5);
            CHECK(sigma <= 1.5);
        }
    }
}

TEST_CASE("feature derivatives match finite differences") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    struct Case {
        fm::FeatureMapSpec spec;
        bool kink;  // avoid lattice kinks when probing
    };
    // frequency ladders kept moderate so the h=1e-5 central difference is
    // meaningful (truncation error grows with the cube of the frequency)
    std::vector<Case> cases = {
        {spec_of(fm::Family::kBasicEncoding, 3), false},
        {spec_of(fm::Family::kPositionalEncoding, 3, 3.0), false},
        {spec_of(fm::Family::kRandomFourier, 4, 2.0), false},
        {spec_of(fm::Family::kSinusoidal, 4), false},
        {spec_of(fm::Family::kComplexTriangle, 5), true},
        {spec_of(fm::Family::kComplexGaussian, 9, 0.3), false},
        {spec_of(fm::Family::kRbf, 5), false},
        {spec_of(fm::Family::kRbfP, 5, 1.0, 4), false},
        {spec_of(fm::Family::kRbf, 5, 1.0, 0, fm::RbfKind::kCubic), true},
        {spec_of(fm::Family::kRbf, 5, 1.0, 0, fm::RbfKind::kMultiquadric), false},
        {spec_of(fm::Family::kRbf, 5, 1.0, 0, fm::RbfKind::kInverseMultiquadric), false},
        {spec_of(fm::Family::kRbf, 5, 1.0, 0, fm::RbfKind::kThinPlateSpline), true},
    };
    for (auto& c : cases) {
        CAPTURE(fm::family_name(c.spec.family));
        CAPTURE(fm::rbf_kind_name(c.spec.rbf_kind));
        BuiltMap bm(c.spec, 2);
        std::vector<ad::NodeId> d0;
        for (auto f : bm.feats) d0.push_back(bm.g.derive(f, bm.x[0]));
        for (int rep = 0; rep < 5; ++rep) {
            double pt[2] = {u(rng), u(rng)};
            if (c.kink) {
                // stay >= 1e-3 away from centers / grid knots along axis 0
                pt[0] = 0.3117 + 0.001 * rep;
            }
            auto probe = [&](double v) {
                double q[2] = {v, pt[1]};
                return bm.eval_at(std::span<const double>(q, 2));
            };
            auto base = bm.eval_at(std::span<const double>(pt, 2));
            for (std::size_t j = 0; j < bm.feats.size(); ++j) {
                auto f1 = [&](double v) { return probe(v)[j]; };
                double fd = central_diff(f1, pt[0]);
                bm.eval_at(std::span<const double>(pt, 2));
                double an = bm.g.value(d0[j]);
                if (std::fabs(fd) < 1e-9 && std::fabs(an) < 1e-9) continue;
                CHECK_MESSAGE(close(an, fd, 1e-7, 1e-5),
                              "feature " << j << " at (" << pt[0] << "," << pt[1] << "): " << an
                                         << " vs " << fd);
            }
            (void)base;
        }
    }
}

TEST_CASE("empirical kernel") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    SUBCASE("ff diagonal equals m and the kernel is shift-invariant") {
        auto spec = spec_of(fm::Family::kRandomFourier, 6, 1.5);
        const int npts = 40;
        std::vector<double> pts(npts);
        for (auto& p : pts) p = u(rng);
        auto gram = fm::empirical_kernel(spec, 1, pts, npts);
        for (int i = 0; i < npts; ++i)
            CHECK(gram[i * npts + i] == doctest::Approx(6.0).epsilon(1e-12));

        // K(x, y) vs K(x + d, y + d) over random translated pairs
        for (int rep = 0; rep < 100; ++rep) {
            double x = u(rng), y = u(rng), d = u(rng);
            std::vector<double> quad = {x, y, x + d, y + d};
            auto k = fm::empirical_kernel(spec, 1, quad, 4);
            CHECK(std::fabs(k[0 * 4 + 1] - k[2 * 4 + 3]) < 1e-9);
        }
    }
    SUBCASE("gram matrices are symmetric and PSD") {
        for (auto fam : {fm::Family::kRandomFourier, fm::Family::kRbf, fm::Family::kSinusoidal}) {
            auto spec = spec_of(fam, 8);
            const int npts = 24;
            std::vector<double> pts(npts * 2);
            for (auto& p : pts) p = u(rng);
            auto gram = fm::empirical_kernel(spec, 2, pts, npts);
            for (int i = 0; i < npts; ++i)
                for (int j = 0; j < npts; ++j)
                    CHECK(gram[i * npts + j] == gram[j * npts + i]);
            auto eig = testing::symmetric_eigenvalues(gram, npts);
            for (double ev : eig) CHECK(ev >= -1e-9);
        }
    }
    SUBCASE("normalized gaussian rbf entries stay within [0, 1]") {
        auto spec = spec_of(fm::Family::kRbf, 12);
        const int npts = 32;
        std::vector<double> pts(npts * 2);
        for (auto& p : pts) p = u(rng);
        auto gram = fm::empirical_kernel(spec, 2, pts, npts);
        for (double v : gram) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0 + 1e-12);
        }
    }
    SUBCASE("too many points rejected") {
        std::vector<double> pts(3000, 0.0);
        CHECK_THROWS_AS(fm::empirical_kernel(spec_of(fm::Family::kRbf, 4), 1, pts, 3000),
                        std::invalid_argument);
    }
}

TEST_CASE("be uses the dyadic ladder, pe uses sigma^(j/m)") {
    const double x0 = 0.123;
    auto be = spec_of(fm::Family::kBasicEncoding, 3);
    BuiltMap bbe(be, 1);
    auto f = bbe.eval_at(std::span<const double>(&x0, 1));
    for (int j = 0; j < 3; ++j) {
        CHECK(f[2 * j] == doctest::Approx(std::cos(kTwoPi * std::ldexp(1.0, j) * x0)).epsilon(1e-14));
        CHECK(f[2 * j + 1] ==
              doctest::Approx(std::sin(kTwoPi * std::ldexp(1.0, j) * x0)).epsilon(1e-14));
    }
    auto pe = spec_of(fm::Family::kPositionalEncoding, 3, 10.0);
    BuiltMap bpe(pe, 1);
    auto fp = bpe.eval_at(std::span<const double>(&x0, 1));
    for (int j = 0; j < 3; ++j) {
        double freq = std::pow(10.0, j / 3.0);
        CHECK(fp[2 * j] == doctest::Approx(std::cos(kTwoPi * freq * x0)).epsilon(1e-14));
    }
}

TEST_CASE("validate rejects bad hyperparameters") {
    auto bad_m = spec_of(fm::Family::kRbf, 0);
    CHECK_THROWS_AS(fm::validate(bad_m), std::invalid_argument);
    auto bad_sigma = spec_of(fm::Family::kRandomFourier, 4, -1.0);
    CHECK_THROWS_AS(fm::validate(bad_sigma), std::invalid_argument);
    auto bad_poly = spec_of(fm::Family::kRbfP, 4, 1.0, -2);
    CHECK_THROWS_AS(fm::validate(bad_poly), std::invalid_argument);
}
