#include "featlab/featmap/feature_map.hpp"

#include <cfloat>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "featlab/autodiff/batch.hpp"
#include "featlab/util/rng.hpp"

namespace featlab::fm {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int cg_bumps_per_dim(int m, int n) {
    int p = static_cast<int>(std::ceil(std::pow(static_cast<double>(m), 1.0 / n) - 1e-9));
    return std::max(p, 1);
}

double cg_total(int p, int n) { return std::pow(static_cast<double>(p), n); }
}  // namespace

void validate(const FeatureMapSpec& spec) {
    if (spec.m < 1) throw std::invalid_argument("featmap: m must be >= 1");
    if (spec.k_poly < 0) throw std::invalid_argument("featmap: k_poly must be >= 0");
    bool needs_sigma = spec.family == Family::kPositionalEncoding ||
                       spec.family == Family::kRandomFourier ||
                       spec.family == Family::kComplexGaussian ||
                       ((spec.family == Family::kRbf || spec.family == Family::kRbfP) &&
                        spec.rbf_kind == RbfKind::kGaussian);
    if (needs_sigma && !(spec.sigma > 0.0))
        throw std::invalid_argument("featmap: sigma must be > 0 for this family");
}

int output_width(const FeatureMapSpec& spec, int n) {
    switch (spec.family) {
        case Family::kIdentity: return n;
        case Family::kBasicEncoding:
        case Family::kPositionalEncoding: return 2 * spec.m * n;
        case Family::kRandomFourier: return 2 * spec.m;
        case Family::kSinusoidal: return spec.m;
        case Family::kComplexTriangle: return spec.m * n;
        case Family::kComplexGaussian: {
            int p = cg_bumps_per_dim(spec.m, n);
            double total = cg_total(p, n);
            if (total > 4096)
                throw std::invalid_argument("featmap: complex-gaussian feature count p^n exceeds 4096");
            return static_cast<int>(total);
        }
        case Family::kRbf: return spec.m;
        case Family::kRbfP: return spec.m + spec.k_poly;
    }
    throw std::logic_error("unreachable");
}

std::vector<SliceSpec> trainable_slices(const FeatureMapSpec& spec, int n) {
    std::vector<SliceSpec> s;
    switch (spec.family) {
        case Family::kSinusoidal:
            s.push_back({"featmap.W", spec.m * n});
            s.push_back({"featmap.b", spec.m});
            break;
        case Family::kRbf:
        case Family::kRbfP:
            s.push_back({"featmap.centers", spec.m * n});
            if (spec.rbf_kind == RbfKind::kGaussian) s.push_back({"featmap.log_widths", spec.m});
            break;
        default: break;
    }
    return s;
}

int trainable_count(const FeatureMapSpec& spec, int n) {
    int total = 0;
    for (const auto& s : trainable_slices(spec, n)) total += s.len;
    return total;
}

std::vector<double> init_trainable(const FeatureMapSpec& spec, int n) {
    validate(spec);
    std::vector<double> v;
    switch (spec.family) {
        case Family::kSinusoidal: {
            auto rng = make_rng(spec.seed, "featmap.sf");
            double bound = std::sqrt(1.0 / n);
            std::uniform_real_distribution<double> u(-bound, bound);
            for (int i = 0; i < spec.m * n + spec.m; ++i) v.push_back(u(rng));
            break;
        }
        case Family::kRbf:
        case Family::kRbfP: {
            auto rng = make_rng(spec.seed, "featmap.centers");
            std::normal_distribution<double> gauss(0.0, 1.0);
            for (int i = 0; i < spec.m * n; ++i) v.push_back(gauss(rng));
            if (spec.rbf_kind == RbfKind::kGaussian) {
                auto wrng = make_rng(spec.seed, "featmap.widths");
                std::uniform_real_distribution<double> u(std::log(0.5), std::log(1.5));
                for (int i = 0; i < spec.m; ++i) v.push_back(u(wrng));
            }
            break;
        }
        default: break;
    }
    return v;
}

FrozenState init_frozen(const FeatureMapSpec& spec, int n) {
    validate(spec);
    FrozenState st;
    if (spec.family == Family::kRandomFourier) {
        auto rng = make_rng(spec.seed, "featmap.ff");
        std::normal_distribution<double> gauss(0.0, 1.0);
        st.freq.resize(static_cast<std::size_t>(spec.m) * n);
        for (auto& f : st.freq) f = gauss(rng);
    }
    return st;
}

int frozen_count(const FeatureMapSpec& spec, int n) {
    return spec.family == Family::kRandomFourier ? spec.m * n : 0;
}

std::vector<std::vector<int>> monomial_exponents(int n, int count) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(n, 0);
    // multi-indices of total degree d, lexicographic with leading dims first
    auto gen = [&](auto&& self, int pos, int remaining) -> void {
        if (static_cast<int>(out.size()) >= count) return;
        if (pos == n - 1) {
            cur[pos] = remaining;
            out.push_back(cur);
            return;
        }
        for (int a = remaining; a >= 0; --a) {
            cur[pos] = a;
            self(self, pos + 1, remaining - a);
            if (static_cast<int>(out.size()) >= count) return;
        }
    };
    for (int d = 0; static_cast<int>(out.size()) < count; ++d) gen(gen, 0, d);
    return out;
}

namespace {

// squared distance |x - c_i|^2 with center components given as nodes
ad::NodeId squared_dist(ad::Graph& g, std::span<const ad::NodeId> x,
                        std::span<const ad::NodeId> c) {
    ad::NodeId r2 = g.constant(0.0);
    for (std::size_t k = 0; k < x.size(); ++k) r2 = g.add(r2, g.square(g.sub(x[k], c[k])));
    return r2;
}

// radial profile phi as a function of r^2; Gaussian takes sigma^2 as a node
ad::NodeId radial_profile(ad::Graph& g, RbfKind kind, ad::NodeId r2, ad::NodeId sigma2) {
    switch (kind) {
        case RbfKind::kCubic: return g.pow_real(r2, 1.5);
        case RbfKind::kThinPlateSpline:
            // r^2 log r = 0.5 r^2 log(r^2); clamping the log argument pins phi(0)=0
            return g.scale(0.5, g.mul(r2, g.log(g.max_with(r2, DBL_MIN))));
        case RbfKind::kGaussian: return g.exp(g.neg(g.div(r2, sigma2)));
        case RbfKind::kMultiquadric: return g.sqrt(g.add_const(r2, 1.0));
        case RbfKind::kInverseMultiquadric:
            return g.div(g.constant(1.0), g.sqrt(g.add_const(r2, 1.0)));
    }
    throw std::logic_error("unreachable");
}

std::vector<ad::NodeId> rbf_block(const FeatureMapSpec& spec, int n,
                                  std::span<const ad::NodeId> trainable,
                                  std::span<const ad::NodeId> x, ad::Graph& g) {
    const int m = spec.m;
    std::span<const ad::NodeId> centers = trainable.subspan(0, static_cast<std::size_t>(m) * n);
    std::span<const ad::NodeId> log_widths =
        spec.rbf_kind == RbfKind::kGaussian ? trainable.subspan(static_cast<std::size_t>(m) * n, m)
                                            : std::span<const ad::NodeId>{};
    std::vector<ad::NodeId> phi(m);
    for (int i = 0; i < m; ++i) {
        ad::NodeId r2 = squared_dist(g, x, centers.subspan(static_cast<std::size_t>(i) * n, n));
        ad::NodeId sigma2{};
        if (spec.rbf_kind == RbfKind::kGaussian)
            sigma2 = g.exp(g.scale(2.0, log_widths[i]));  // widths stay positive
        phi[i] = radial_profile(g, spec.rbf_kind, r2, sigma2);
    }
    ad::NodeId total = phi[0];
    for (int i = 1; i < m; ++i) total = g.add(total, phi[i]);
    ad::NodeId inv_total = g.div(g.constant(1.0), total);
    for (int i = 0; i < m; ++i) phi[i] = g.mul(phi[i], inv_total);
    return phi;
}

}  // namespace

std::vector<ad::NodeId> apply(const FeatureMapSpec& spec, int n, const FrozenState& frozen,
                              std::span<const ad::NodeId> trainable,
                              std::span<const ad::NodeId> x, ad::Graph& g) {
    validate(spec);
    if (static_cast<int>(x.size()) != n) throw std::invalid_argument("featmap: bad input width");
    if (static_cast<int>(trainable.size()) != trainable_count(spec, n))
        throw std::invalid_argument("featmap: bad trainable leaf count");
    std::vector<ad::NodeId> out;

    switch (spec.family) {
        case Family::kIdentity:
            out.assign(x.begin(), x.end());
            break;

        case Family::kBasicEncoding:
        case Family::kPositionalEncoding: {
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < spec.m; ++j) {
                    double f = spec.family == Family::kBasicEncoding
                                   ? std::ldexp(1.0, j)  // 2^j
                                   : std::pow(spec.sigma, static_cast<double>(j) / spec.m);
                    ad::NodeId z = g.scale(kTwoPi * f, x[i]);
                    out.push_back(g.cos(z));
                    out.push_back(g.sin(z));
                }
            }
            break;
        }

        case Family::kRandomFourier: {
            std::vector<ad::NodeId> z(spec.m);
            for (int k = 0; k < spec.m; ++k) {
                ad::NodeId dot = g.constant(0.0);
                for (int i = 0; i < n; ++i)
                    dot = g.add(dot, g.scale(frozen.freq[static_cast<std::size_t>(k) * n + i], x[i]));
                z[k] = g.scale(kTwoPi * spec.sigma, dot);
            }
            for (int k = 0; k < spec.m; ++k) out.push_back(g.cos(z[k]));
            for (int k = 0; k < spec.m; ++k) out.push_back(g.sin(z[k]));
            break;
        }

        case Family::kSinusoidal: {
            std::span<const ad::NodeId> W = trainable.subspan(0, static_cast<std::size_t>(spec.m) * n);
            std::span<const ad::NodeId> b = trainable.subspan(static_cast<std::size_t>(spec.m) * n, spec.m);
            for (int k = 0; k < spec.m; ++k) {
                ad::NodeId dot = g.constant(0.0);
                for (int i = 0; i < n; ++i)
                    dot = g.add(dot, g.mul(W[static_cast<std::size_t>(k) * n + i], x[i]));
                out.push_back(g.sin(g.add(g.scale(kTwoPi, dot), b[k])));
            }
            break;
        }

        case Family::kComplexTriangle: {
            const int m = spec.m;
            double d = m > 1 ? 2.0 / (m - 1) : 1.0;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < m; ++j) {
                    double t = m > 1 ? static_cast<double>(j) / (m - 1) : 0.5;
                    ad::NodeId r = g.abs(g.sub(x[i], g.constant(t)));
                    ad::NodeId tri = g.sub(g.constant(1.0), g.scale(1.0 / (0.5 * d), r));
                    out.push_back(g.max_with(tri, 0.0));
                }
            }
            break;
        }

        case Family::kComplexGaussian: {
            int p = cg_bumps_per_dim(spec.m, n);
            if (cg_total(p, n) > 4096)
                throw std::invalid_argument("featmap: complex-gaussian feature count p^n exceeds 4096");
            double inv2s2 = 0.5 / (spec.sigma * spec.sigma);
            std::vector<std::vector<ad::NodeId>> bumps(n);
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < p; ++k) {
                    double tau = p > 1 ? static_cast<double>(k) / (p - 1) : 0.5;
                    ad::NodeId d2 = g.square(g.sub(x[i], g.constant(tau)));
                    bumps[i].push_back(g.exp(g.neg(g.scale(inv2s2, d2))));
                }
            }
            // Kronecker product over dimensions, first dimension slowest
            out = bumps[0];
            for (int i = 1; i < n; ++i) {
                std::vector<ad::NodeId> next;
                next.reserve(out.size() * bumps[i].size());
                for (ad::NodeId a : out)
                    for (ad::NodeId b : bumps[i]) next.push_back(g.mul(a, b));
                out = std::move(next);
            }
            break;
        }

        case Family::kRbf:
            out = rbf_block(spec, n, trainable, x, g);
            break;

        case Family::kRbfP: {
            out = rbf_block(spec, n, trainable, x, g);
            // monomial tail sits outside the partition quotient
            for (const auto& expo : monomial_exponents(n, spec.k_poly)) {
                ad::NodeId mono = g.constant(1.0);
                for (int i = 0; i < n; ++i)
                    if (expo[i] > 0) mono = g.mul(mono, g.pow_int(x[i], expo[i]));
                out.push_back(mono);
            }
            break;
        }
    }

    if (static_cast<int>(out.size()) != output_width(spec, n))
        throw std::logic_error("featmap: output width mismatch");
    return out;
}

std::vector<double> empirical_kernel(const FeatureMapSpec& spec, int n,
                                     std::span<const double> pts, int npts) {
    if (npts > 2048) throw std::invalid_argument("empirical_kernel: at most 2048 points");
    ad::Graph g;
    std::vector<ad::NodeId> x(n);
    for (auto& xi : x) xi = g.input();
    FrozenState frozen = init_frozen(spec, n);
    std::vector<double> tvals = init_trainable(spec, n);
    std::vector<ad::NodeId> tleaves(tvals.size());
    for (auto& t : tleaves) t = g.param();
    auto feats = apply(spec, n, frozen, tleaves, x, g);

    ad::BatchEval be(g, feats, x, tleaves);
    be.set_params(tvals);
    const int w = static_cast<int>(feats.size());
    std::vector<double> fv(static_cast<std::size_t>(npts) * w);
    be.forward(pts, npts, fv);

    std::vector<double> gram(static_cast<std::size_t>(npts) * npts);
    for (int i = 0; i < npts; ++i) {
        for (int j = i; j < npts; ++j) {
            double s = 0.0;
            const double* fi = &fv[static_cast<std::size_t>(i) * w];
            const double* fj = &fv[static_cast<std::size_t>(j) * w];
            for (int k = 0; k < w; ++k) s += fi[k] * fj[k];
            gram[static_cast<std::size_t>(i) * npts + j] = s;
            gram[static_cast<std::size_t>(j) * npts + i] = s;
        }
    }
    return gram;
}

const char* family_name(Family f) {
    switch (f) {
        case Family::kIdentity: return "identity";
        case Family::kBasicEncoding: return "be";
        case Family::kPositionalEncoding: return "pe";
        case Family::kRandomFourier: return "ff";
        case Family::kSinusoidal: return "sf";
        case Family::kComplexTriangle: return "ct";
        case Family::kComplexGaussian: return "cg";
        case Family::kRbf: return "rbf";
        case Family::kRbfP: return "rbf-p";
    }
    return "?";
}

Family parse_family(const std::string& s) {
    if (s == "identity" || s == "pinn") return Family::kIdentity;
    if (s == "be") return Family::kBasicEncoding;
    if (s == "pe") return Family::kPositionalEncoding;
    if (s == "ff") return Family::kRandomFourier;
    if (s == "sf") return Family::kSinusoidal;
    if (s == "ct") return Family::kComplexTriangle;
    if (s == "cg") return Family::kComplexGaussian;
    if (s == "rbf") return Family::kRbf;
    if (s == "rbf-p" || s == "rbfp") return Family::kRbfP;
    throw std::invalid_argument("unknown feature map family: " + s);
}

const char* rbf_kind_name(RbfKind k) {
    switch (k) {
        case RbfKind::kCubic: return "cubic";
        case RbfKind::kThinPlateSpline: return "tps";
        case RbfKind::kGaussian: return "gaussian";
        case RbfKind::kMultiquadric: return "mq";
        case RbfKind::kInverseMultiquadric: return "imq";
    }
    return "?";
}

RbfKind parse_rbf_kind(const std::string& s) {
    if (s == "cubic") return RbfKind::kCubic;
    if (s == "tps") return RbfKind::kThinPlateSpline;
    if (s == "gaussian" || s == "ga") return RbfKind::kGaussian;
    if (s == "mq") return RbfKind::kMultiquadric;
    if (s == "imq") return RbfKind::kInverseMultiquadric;
    throw std::invalid_argument("unknown rbf kind: " + s);
}

}  // namespace featlab::fm
