#include "featlab/pde/burgers_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace featlab::pde {

namespace {

constexpr double kPi = std::numbers::pi;

// 8-point Gauss-Legendre rule on [-1, 1]
constexpr double kGlNode[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                               0.9602898564975363};
constexpr double kGlWeight[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                 0.1012285362903763};

// log of the Cole-Hopf integrand: phi0(eta) * exp(-(x-eta)^2 / 4 nu t) with
// phi0(eta) = exp((1 - cos(pi eta)) / (2 nu pi)) from u0 = -sin(pi x)
inline double log_integrand(double eta, double x, double inv4nut) {
    constexpr double inv2nupi = 1.0 / (2.0 * kBurgersNu * kPi);
    double d = x - eta;
    return (1.0 - std::cos(kPi * eta)) * inv2nupi - d * d * inv4nut;
}

struct PanelSums {
    double num = 0.0;  // integrand * sin(pi eta)
    double den = 0.0;
};

void add_panels(double lo, double hi, double h, double x, double inv4nut, double shift,
                PanelSums& acc) {
    if (hi <= lo) return;
    int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / h)));
    double w = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
        double mid = lo + (i + 0.5) * w;
        for (int k = 0; k < 4; ++k) {
            for (double sgn : {-1.0, 1.0}) {
                double eta = mid + sgn * 0.5 * w * kGlNode[k];
                double f = kGlWeight[k] * 0.5 * w * std::exp(log_integrand(eta, x, inv4nut) - shift);
                acc.num += f * std::sin(kPi * eta);
                acc.den += f;
            }
        }
    }
}

}  // namespace

// u = -2 nu phi_x / phi with the x-derivative moved onto phi0, evaluated by
// composite Gauss-Legendre: a fine zone around the heat kernel at eta ~ x and
// a coarse zone covering the phi0 peaks at eta = +-1. The max of the exponent
// is subtracted before exponentiation; the quotient cancels the shift.
double burgers_reference(double x, double t, int refine) {
    if (t <= 0.0) return -std::sin(kPi * x);
    const double s = std::sqrt(4.0 * kBurgersNu * t);
    const double inv4nut = 1.0 / (4.0 * kBurgersNu * t);

    // exponent maximum is within the sampled range; 100 bounds the phi0 part
    double shift = 100.0;

    const double fine_h = std::min(0.004, 0.5 * s) / (refine ? 2.0 : 1.0);
    const double coarse_h = 0.004 / (refine ? 2.0 : 1.0);
    const double fine_lo = x - 8.0 * s, fine_hi = x + 8.0 * s;
    const double lo = std::min(fine_lo, -1.0 - 4.0 * coarse_h);
    const double hi = std::max(fine_hi, 1.0 + 4.0 * coarse_h);

    PanelSums acc;
    add_panels(lo, fine_lo, coarse_h, x, inv4nut, shift, acc);
    add_panels(fine_lo, fine_hi, fine_h, x, inv4nut, shift, acc);
    add_panels(fine_hi, hi, coarse_h, x, inv4nut, shift, acc);
    return -acc.num / acc.den;
}

}  // namespace featlab::pde
