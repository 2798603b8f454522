#include "featlab/net/network.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "featlab/util/rng.hpp"

namespace featlab::net {

ParamStore::ParamStore(std::vector<Slice> slices) : slices_(std::move(slices)) {
    std::size_t total = 0;
    for (auto& s : slices_) {
        s.offset = total;
        total += s.len;
    }
    values_.assign(total, 0.0);
}

bool ParamStore::has(const std::string& name) const {
    for (const auto& s : slices_)
        if (s.name == name) return true;
    return false;
}

std::span<double> ParamStore::slice(const std::string& name) {
    for (const auto& s : slices_)
        if (s.name == name) return std::span<double>(values_).subspan(s.offset, s.len);
    throw std::invalid_argument("ParamStore: no slice named " + name);
}

std::span<const double> ParamStore::slice(const std::string& name) const {
    for (const auto& s : slices_)
        if (s.name == name) return std::span<const double>(values_).subspan(s.offset, s.len);
    throw std::invalid_argument("ParamStore: no slice named " + name);
}

namespace {

struct LayerDims {
    std::vector<std::pair<int, int>> affine;  // (fan_in, fan_out) per affine layer
};

LayerDims layer_dims(const NetworkSpec& spec) {
    LayerDims d;
    int w = fm::output_width(spec.feature_map, spec.input_dim);
    for (int h : spec.hidden) {
        d.affine.emplace_back(w, h);
        w = h;
    }
    d.affine.emplace_back(w, spec.output_dim);
    return d;
}

}  // namespace

std::vector<Slice> param_layout(const NetworkSpec& spec, std::span<const CoeffSpec> coeffs) {
    std::vector<Slice> out;
    for (const auto& s : fm::trainable_slices(spec.feature_map, spec.input_dim))
        out.push_back({s.name, 0, static_cast<std::size_t>(s.len)});
    auto dims = layer_dims(spec);
    for (std::size_t l = 0; l < dims.affine.size(); ++l) {
        auto [fi, fo] = dims.affine[l];
        std::string base = l + 1 == dims.affine.size() ? "head" : "layer" + std::to_string(l);
        out.push_back({base + ".weight", 0, static_cast<std::size_t>(fi) * fo});
        out.push_back({base + ".bias", 0, static_cast<std::size_t>(fo)});
    }
    for (const auto& c : coeffs) out.push_back({"coeff." + c.name, 0, 1});
    return out;
}

ParamCounts param_count(const NetworkSpec& spec) {
    ParamCounts c;
    for (const auto& s : param_layout(spec)) c.trainable += s.len;
    c.frozen = static_cast<std::size_t>(fm::frozen_count(spec.feature_map, spec.input_dim));
    return c;
}

fm::FeatureMapSpec seeded_feature_map(const NetworkSpec& spec, std::uint64_t seed) {
    fm::FeatureMapSpec fspec = spec.feature_map;
    fspec.seed = stream_seed(seed, "featmap");
    return fspec;
}

ParamStore init_params(const NetworkSpec& spec, std::uint64_t seed,
                       std::span<const CoeffSpec> coeffs) {
    fm::FeatureMapSpec fspec = seeded_feature_map(spec, seed);
    ParamStore store(param_layout(spec, coeffs));

    auto fvals = fm::init_trainable(fspec, spec.input_dim);
    std::size_t k = 0;
    for (const auto& s : fm::trainable_slices(fspec, spec.input_dim)) {
        auto dst = store.slice(s.name);
        for (int i = 0; i < s.len; ++i) dst[i] = fvals[k++];
    }

    auto dims = layer_dims(spec);
    auto rng = make_rng(seed, "net.weights");
    for (std::size_t l = 0; l < dims.affine.size(); ++l) {
        auto [fi, fo] = dims.affine[l];
        std::string base = l + 1 == dims.affine.size() ? "head" : "layer" + std::to_string(l);
        double bound = std::sqrt(6.0 / (fi + fo));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (double& w : store.slice(base + ".weight")) w = u(rng);
        // biases stay zero
    }
    for (const auto& c : coeffs) store.slice("coeff." + c.name)[0] = c.init_value;
    return store;
}

NetGraph build_net_graph(const NetworkSpec& spec, const fm::FrozenState& frozen, ad::Graph& g,
                         std::span<const CoeffSpec> coeffs) {
    NetGraph ng;
    ng.graph = &g;
    ng.x.resize(spec.input_dim);
    for (auto& xi : ng.x) xi = g.input();

    auto layout = param_layout(spec, coeffs);
    std::size_t total = 0;
    for (const auto& s : layout) total += s.len;
    ng.param_leaves.resize(total);
    for (auto& p : ng.param_leaves) p = g.param();

    std::size_t off = 0;
    auto take = [&](std::size_t len) {
        auto s = std::span<const ad::NodeId>(ng.param_leaves).subspan(off, len);
        off += len;
        return s;
    };

    int n_feat_train = fm::trainable_count(spec.feature_map, spec.input_dim);
    auto feat_leaves = take(static_cast<std::size_t>(n_feat_train));
    std::vector<ad::NodeId> h =
        fm::apply(spec.feature_map, spec.input_dim, frozen, feat_leaves, ng.x, g);

    auto dims = layer_dims(spec);
    for (std::size_t l = 0; l < dims.affine.size(); ++l) {
        auto [fi, fo] = dims.affine[l];
        auto W = take(static_cast<std::size_t>(fi) * fo);
        auto b = take(static_cast<std::size_t>(fo));
        std::vector<ad::NodeId> z(fo);
        for (int o = 0; o < fo; ++o) {
            ad::NodeId acc = b[o];
            for (int i = 0; i < fi; ++i)
                acc = g.add(acc, g.mul(W[static_cast<std::size_t>(o) * fi + i], h[i]));
            z[o] = acc;
        }
        if (l + 1 < dims.affine.size())
            for (auto& zo : z) zo = g.tanh(zo);
        h = std::move(z);
    }
    ng.outputs = h;
    for (std::size_t c = 0; c < coeffs.size(); ++c)
        ng.coeff_leaves.push_back(ng.param_leaves[off + c]);
    return ng;
}

}  // namespace featlab::net
