#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "featlab/autodiff/graph.hpp"

namespace featlab::fm {

enum class Family {
    kIdentity,            // plain coordinates (baseline PINN)
    kBasicEncoding,       // dyadic frequency ladder, fixed
    kPositionalEncoding,  // sigma^(j/m) ladder, fixed
    kRandomFourier,       // frozen Gaussian frequency matrix
    kSinusoidal,          // trainable affine + sin
    kComplexTriangle,     // per-dim triangular bumps
    kComplexGaussian,     // Kronecker product of per-dim Gaussian bumps
    kRbf,                 // partition-normalized radial basis layer
    kRbfP,                // normalized RBF block + monomial tail
};

enum class RbfKind { kCubic, kThinPlateSpline, kGaussian, kMultiquadric, kInverseMultiquadric };

struct FeatureMapSpec {
    Family family = Family::kRbf;
    int m = 128;                            // feature count (family-specific meaning)
    double sigma = 1.0;                     // scale hyperparameter where used
    RbfKind rbf_kind = RbfKind::kGaussian;  // Rbf / RbfP only
    int k_poly = 10;                        // RbfP only
    std::uint64_t seed = 0;
};

void validate(const FeatureMapSpec& spec);

// width of apply()'s output for input dimension n
int output_width(const FeatureMapSpec& spec, int n);

struct SliceSpec {
    std::string name;
    int len;
};

// trainable state owned by the map, in ParamStore layout order
std::vector<SliceSpec> trainable_slices(const FeatureMapSpec& spec, int n);
int trainable_count(const FeatureMapSpec& spec, int n);
std::vector<double> init_trainable(const FeatureMapSpec& spec, int n);

// frozen (non-trainable) state: the random Fourier frequency matrix
struct FrozenState {
    std::vector<double> freq;  // m x n, row-major
};
FrozenState init_frozen(const FeatureMapSpec& spec, int n);
int frozen_count(const FeatureMapSpec& spec, int n);

// Builds the feature expressions at symbolic point x. `trainable` are the
// map's own param leaves, concatenated in trainable_slices order.
std::vector<ad::NodeId> apply(const FeatureMapSpec& spec, int n, const FrozenState& frozen,
                              std::span<const ad::NodeId> trainable,
                              std::span<const ad::NodeId> x, ad::Graph& g);

// Empirical Gram matrix K[i][j] = phi(x_i) . phi(x_j) over points (row-major,
// npts x n, npts <= 2048). Returns row-major npts x npts.
std::vector<double> empirical_kernel(const FeatureMapSpec& spec, int n,
                                     std::span<const double> pts, int npts);

// graded-lexicographic monomial exponents for RbfP: (1, x1..xn, x1^2, x1x2, ...)
std::vector<std::vector<int>> monomial_exponents(int n, int count);

const char* family_name(Family f);
Family parse_family(const std::string& s);
const char* rbf_kind_name(RbfKind k);
RbfKind parse_rbf_kind(const std::string& s);

}  // namespace featlab::fm
