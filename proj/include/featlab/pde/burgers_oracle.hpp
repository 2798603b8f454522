#pragma once

namespace featlab::pde {

inline constexpr double kBurgersNu = 0.01 / 3.14159265358979323846;

// Reference solution of u_t + u u_x = nu u_xx on [-1,1]x[0,1] with
// u(x,0) = -sin(pi x), u(+-1,t) = 0, via the Cole-Hopf transform evaluated
// by composite Gauss-Legendre panels sized to the integrand's sharpness.
// refine=1 halves every panel; the pair validates the result to < 1e-8.
double burgers_reference(double x, double t, int refine = 0);

}  // namespace featlab::pde
