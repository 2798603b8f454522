#include "featlab/pde/lorenz.hpp"

#include <cmath>
#include <stdexcept>

namespace featlab::pde {

namespace {
inline std::array<double, 3> rhs(const LorenzParams& p, const std::array<double, 3>& s) {
    return {p.alpha * (s[1] - s[0]), s[0] * (p.rho - s[2]) - s[1], s[0] * s[1] - p.beta * s[2]};
}
}  // namespace

std::vector<std::array<double, 3>> rk4_trajectory(const LorenzParams& p,
                                                  std::array<double, 3> y0, double t_end,
                                                  double h) {
    if (!(h > 0.0) || !(t_end >= 0.0)) throw std::invalid_argument("rk4_trajectory: bad step/horizon");
    auto n_steps = static_cast<std::size_t>(std::llround(t_end / h));
    std::vector<std::array<double, 3>> out;
    out.reserve(n_steps + 1);
    out.push_back(y0);
    std::array<double, 3> y = y0;
    for (std::size_t i = 0; i < n_steps; ++i) {
        auto k1 = rhs(p, y);
        std::array<double, 3> y2;
        for (int j = 0; j < 3; ++j) y2[j] = y[j] + 0.5 * h * k1[j];
        auto k2 = rhs(p, y2);
        std::array<double, 3> y3;
        for (int j = 0; j < 3; ++j) y3[j] = y[j] + 0.5 * h * k2[j];
        auto k3 = rhs(p, y3);
        std::array<double, 3> y4;
        for (int j = 0; j < 3; ++j) y4[j] = y[j] + h * k3[j];
        auto k4 = rhs(p, y4);
        for (int j = 0; j < 3; ++j)
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        out.push_back(y);
    }
    return out;
}

}  // namespace featlab::pde
