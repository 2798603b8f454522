#include "featlab/pde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace featlab::pde {

namespace {

// Eigenvalues of a symmetric tridiagonal matrix (diagonal d, off-diagonal e)
// by the implicit-shift QL method; d returns the eigenvalues unsorted.
void tridiag_eigenvalues(std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(d.size());
    e.push_back(0.0);
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= 1e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 50) throw std::runtime_error("tridiag_eigenvalues: no convergence");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::fabs(r) : -std::fabs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i], b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && m - 1 >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    e.pop_back();
}

}  // namespace

// Golub-Welsch: nodes are the eigenvalues of the Hermite Jacobi matrix
// (diag 0, off-diag sqrt(k/2)); weights come from the orthonormal recurrence,
// w = 2 / p_n'(x)^2. One Newton polish per node tightens the eigenvalues.
GaussHermite gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
    constexpr double kPiQuarterInv = 0.7511255444649425;  // pi^(-1/4)

    std::vector<double> d(n, 0.0), e;
    for (int k = 1; k < n; ++k) e.push_back(std::sqrt(0.5 * k));
    tridiag_eigenvalues(d, e);
    std::sort(d.begin(), d.end(), [](double a, double b) { return a > b; });

    GaussHermite q;
    q.nodes.assign(n, 0.0);
    q.weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = d[i];
        double pp = 0.0;
        for (int polish = 0; polish < 3; ++polish) {
            double p1 = kPiQuarterInv, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) <= 3e-15 * std::fmax(1.0, std::fabs(z))) break;
        }
        q.nodes[i] = z;
        q.weights[i] = 2.0 / (pp * pp);
    }
    return q;
}

}  // namespace featlab::pde
