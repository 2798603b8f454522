#pragma once

#include <vector>

namespace featlab::pde {

// Gauss-Hermite rule: integral f(z) e^(-z^2) dz ~= sum w_i f(z_i).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussHermite gauss_hermite(int n);

}  // namespace featlab::pde
