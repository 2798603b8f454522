#pragma once

#include <array>
#include <vector>

namespace featlab::pde {

struct LorenzParams {
    double alpha = 10.0;
    double beta = 8.0 / 3.0;
    double rho = 15.0;
};

inline constexpr std::array<double, 3> kLorenzStart{0.0, 1.0, 1.05};

// Classic 4th-order Runge-Kutta with fixed step h; returns the state at every
// grid time 0, h, 2h, ..., including t = 0.
std::vector<std::array<double, 3>> rk4_trajectory(const LorenzParams& p,
                                                  std::array<double, 3> y0, double t_end,
                                                  double h);

}  // namespace featlab::pde
