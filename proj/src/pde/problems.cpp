#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "featlab/pde/burgers_oracle.hpp"
#include "featlab/pde/lorenz.hpp"
#include "featlab/pde/problem.hpp"

namespace featlab::pde {

namespace {

constexpr double kPi = std::numbers::pi;

using ad::Graph;
using ad::NodeId;

// ---- samplers over box faces and segments ----

std::function<void(std::mt19937_64&, std::span<double>)> segment_sampler(
    std::vector<std::array<double, 4>> segs) {
    // segments (x0,y0,x1,y1), picked proportionally to length
    std::vector<double> cum;
    double total = 0.0;
    for (auto& s : segs) {
        total += std::hypot(s[2] - s[0], s[3] - s[1]);
        cum.push_back(total);
    }
    return [segs = std::move(segs), cum = std::move(cum), total](std::mt19937_64& rng,
                                                                 std::span<double> x) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double pick = u(rng) * total;
        std::size_t i = 0;
        while (i + 1 < cum.size() && pick > cum[i]) ++i;
        double s = u(rng);
        x[0] = segs[i][0] + s * (segs[i][2] - segs[i][0]);
        x[1] = segs[i][1] + s * (segs[i][3] - segs[i][1]);
    };
}

PointFn const_target(std::vector<double> vals) {
    return [vals = std::move(vals)](std::span<const double>, std::span<double> out) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = vals[i];
    };
}

// ---- Wave: u_tt - 4 u_xx = 0 on [0,1]x[0,1] ----

PdeProblem make_wave() {
    PdeProblem p;
    p.name = "wave";
    p.input_dim = 2;  // (x, t)
    p.lo = {0.0, 0.0};
    p.hi = {1.0, 1.0};
    p.residual = [](Field& f, std::span<const NodeId>, Graph& g) {
        return std::vector<NodeId>{g.sub(f.d2(0, 1, 1), g.scale(4.0, f.d2(0, 0, 0)))};
    };
    auto exact = [](double x, double t) {
        return std::sin(kPi * x) * std::cos(2.0 * kPi * t) +
               0.5 * std::sin(4.0 * kPi * x) * std::cos(8.0 * kPi * t);
    };
    p.reference = [exact](std::span<const double> x, std::span<double> out) {
        out[0] = exact(x[0], x[1]);
    };
    p.analytic_expr = [](std::span<const NodeId> x, Graph& g) {
        NodeId a = g.mul(g.sin(g.scale(kPi, x[0])), g.cos(g.scale(2.0 * kPi, x[1])));
        NodeId b = g.mul(g.sin(g.scale(4.0 * kPi, x[0])), g.cos(g.scale(8.0 * kPi, x[1])));
        return std::vector<NodeId>{g.add(a, g.scale(0.5, b))};
    };
    BcSet sides;
    sides.name = "bc";
    sides.target = const_target({0.0});
    sides.sample = [](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        x[0] = (rng() & 1) ? 1.0 : 0.0;
        x[1] = u(rng);
    };
    BcSet ic;
    ic.name = "ic";
    ic.target = [](std::span<const double> x, std::span<double> out) {
        out[0] = std::sin(kPi * x[0]) + 0.5 * std::sin(4.0 * kPi * x[0]);
    };
    ic.sample = [](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        x[0] = u(rng);
        x[1] = 0.0;
    };
    BcSet ic_t;
    ic_t.name = "ic_t";
    ic_t.kind = BcKind::kTimeDerivative;
    ic_t.deriv_axis = 1;
    ic_t.target = const_target({0.0});
    ic_t.sample = ic.sample;
    p.bc_sets = {sides, ic, ic_t};
    return p;
}

// ---- Diffusion: u_t - u_xx + e^-t (sin(pi x) - pi^2 sin(pi x)) = 0 ----
// on [-1,1]x[0,1] with exact solution e^-t sin(pi x)

PdeProblem make_diffusion() {
    PdeProblem p;
    p.name = "diffusion";
    p.input_dim = 2;
    p.lo = {-1.0, 0.0};
    p.hi = {1.0, 1.0};
    p.residual = [](Field& f, std::span<const NodeId>, Graph& g) {
        NodeId x = f.x[0], t = f.x[1];
        NodeId force = g.mul(g.exp(g.neg(t)),
                             g.sub(g.sin(g.scale(kPi, x)),
                                   g.scale(kPi * kPi, g.sin(g.scale(kPi, x)))));
        return std::vector<NodeId>{g.add(g.sub(f.d(0, 1), f.d2(0, 0, 0)), force)};
    };
    p.reference = [](std::span<const double> x, std::span<double> out) {
        out[0] = std::exp(-x[1]) * std::sin(kPi * x[0]);
    };
    p.analytic_expr = [](std::span<const NodeId> x, Graph& g) {
        return std::vector<NodeId>{g.mul(g.exp(g.neg(x[1])), g.sin(g.scale(kPi, x[0])))};
    };
    BcSet sides;
    sides.name = "bc";
    sides.target = const_target({0.0});
    sides.sample = [](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        x[0] = (rng() & 1) ? 1.0 : -1.0;
        x[1] = u(rng);
    };
    BcSet ic;
    ic.name = "ic";
    ic.target = [](std::span<const double> x, std::span<double> out) {
        out[0] = std::sin(kPi * x[0]);
    };
    ic.sample = [](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        x[0] = u(rng);
        x[1] = 0.0;
    };
    p.bc_sets = {sides, ic};
    return p;
}

// ---- Heat: u_t - u_xx/(500 pi)^2 - u_yy/pi^2 = 0 on [0,1]^2 x [0,5] ----
// separable reference e^(-lambda t) sin(20 pi x) sin(pi y), lambda = 1.0016

PdeProblem make_heat() {
    PdeProblem p;
    p.name = "heat";
    p.input_dim = 3;  // (x, y, t)
    p.lo = {0.0, 0.0, 0.0};
    p.hi = {1.0, 1.0, 5.0};
    const double cx = 1.0 / ((500.0 * kPi) * (500.0 * kPi));
    const double cy = 1.0 / (kPi * kPi);
    const double lambda = 400.0 / 250000.0 + 1.0;
    p.residual = [cx, cy](Field& f, std::span<const NodeId>, Graph& g) {
        return std::vector<NodeId>{g.sub(g.sub(f.d(0, 2), g.scale(cx, f.d2(0, 0, 0))),
                                         g.scale(cy, f.d2(0, 1, 1)))};
    };
    p.reference = [lambda](std::span<const double> x, std::span<double> out) {
        out[0] = std::exp(-lambda * x[2]) * std::sin(20.0 * kPi * x[0]) * std::sin(kPi * x[1]);
    };
    p.analytic_expr = [lambda](std::span<const NodeId> x, Graph& g) {
        NodeId s = g.mul(g.sin(g.scale(20.0 * kPi, x[0])), g.sin(g.scale(kPi, x[1])));
        return std::vector<NodeId>{g.mul(g.exp(g.scale(-lambda, x[2])), s)};
    };
    BcSet walls;
    walls.name = "bc";
    walls.target = const_target({0.0});
    walls.sample = [](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        // random edge of the unit square, random time
        int edge = static_cast<int>(rng() & 3);
        double s = u(rng);
        switch (edge) {
            case 0: x[0] = 0.0; x[1] = s; break;
            case 1: x[0] = 1.0; x[1] = s; break;
            case 2: x[0] = s; x[1] = 0.0; break;
            default: x[0] = s; x[1] = 1.0; break;
        }
        x[2] = 5.0 * u(rng);
    };
    BcSet ic;
    ic.name = "ic";
    ic.target = [](std::span<const double> x, std::span<double> out) {
        out[0] = std::sin(20.0 * kPi * x[0]) * std::sin(kPi * x[1]);
    };
    ic.sample = [](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        x[0] = u(rng);
        x[1] = u(rng);
        x[2] = 0.0;
    };
    p.bc_sets = {walls, ic};
    return p;
}

// ---- Poisson with four disk holes: -laplace(u) = 0 ----

PdeProblem make_poisson_holes() {
    PdeProblem p;
    p.name = "poisson-holes";
    p.input_dim = 2;
    p.lo = {-0.5, -0.5};
    p.hi = {0.5, 0.5};
    p.disk_holes = {{0.3, 0.3, 0.1}, {-0.3, 0.3, 0.1}, {0.3, -0.3, 0.1}, {-0.3, -0.3, 0.1}};
    p.residual = [](Field& f, std::span<const NodeId>, Graph& g) {
        return std::vector<NodeId>{g.neg(g.add(f.d2(0, 0, 0), f.d2(0, 1, 1)))};
    };
    BcSet outer;
    outer.name = "outer";
    outer.target = const_target({1.0});
    outer.sample = segment_sampler({{-0.5, -0.5, 0.5, -0.5},
                                    {0.5, -0.5, 0.5, 0.5},
                                    {0.5, 0.5, -0.5, 0.5},
                                    {-0.5, 0.5, -0.5, -0.5}});
    BcSet holes;
    holes.name = "holes";
    holes.target = const_target({0.0});
    auto disks = p.disk_holes;
    holes.sample = [disks](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const Disk& d = disks[rng() & 3];  // equal radii: uniform pick
        double th = 2.0 * kPi * u(rng);
        x[0] = d.cx + d.r * std::cos(th);
        x[1] = d.cy + d.r * std::sin(th);
    };
    p.bc_sets = {outer, holes};
    return p;
}

// ---- Burgers: u_t + u u_x = nu u_xx, nu = 0.01/pi ----

PdeProblem make_burgers(bool inverse) {
    PdeProblem p;
    p.name = inverse ? "i-burgers" : "burgers";
    p.input_dim = 2;
    p.lo = {-1.0, 0.0};
    p.hi = {1.0, 1.0};
    if (inverse) {
        p.inverse_coeffs = {{"mu1", 1.0, 0.0}, {"mu2", kBurgersNu, 0.0}};
        p.residual = [](Field& f, std::span<const NodeId> c, Graph& g) {
            NodeId conv = g.mul(c[0], g.mul(f.out(0), f.d(0, 0)));
            return std::vector<NodeId>{
                g.sub(g.add(f.d(0, 1), conv), g.mul(c[1], f.d2(0, 0, 0)))};
        };
    } else {
        p.residual = [](Field& f, std::span<const NodeId>, Graph& g) {
            NodeId conv = g.mul(f.out(0), f.d(0, 0));
            return std::vector<NodeId>{
                g.sub(g.add(f.d(0, 1), conv), g.scale(kBurgersNu, f.d2(0, 0, 0)))};
        };
    }
    p.reference = [](std::span<const double> x, std::span<double> out) {
        out[0] = burgers_reference(x[0], x[1]);
    };
    BcSet sides;
    sides.name = "bc";
    sides.target = const_target({0.0});
    sides.sample = [](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        x[0] = (rng() & 1) ? 1.0 : -1.0;
        x[1] = u(rng);
    };
    BcSet ic;
    ic.name = "ic";
    ic.target = [](std::span<const double> x, std::span<double> out) {
        out[0] = -std::sin(kPi * x[0]);
    };
    ic.sample = [](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        x[0] = u(rng);
        x[1] = 0.0;
    };
    p.bc_sets = {sides, ic};
    return p;
}

// ---- Steady Navier-Stokes, back-step channel, Re = 100 ----
// outputs (u, v, p); domain [0,4]x[0,2] minus the block [0,2]x[1,2]

PdeProblem make_ns_step() {
    PdeProblem p;
    p.name = "ns-step";
    p.input_dim = 2;
    p.output_dim = 3;
    p.lo = {0.0, 0.0};
    p.hi = {4.0, 2.0};
    p.rect_holes = {{0.0, 2.0, 1.0, 2.0}};
    const double inv_re = 1.0 / 100.0;
    p.residual = [inv_re](Field& f, std::span<const NodeId>, Graph& g) {
        NodeId ux = f.d(0, 0), uy = f.d(0, 1), vx = f.d(1, 0), vy = f.d(1, 1);
        NodeId lap_u = g.add(f.d2(0, 0, 0), f.d2(0, 1, 1));
        NodeId lap_v = g.add(f.d2(1, 0, 0), f.d2(1, 1, 1));
        NodeId cont = g.add(ux, vy);
        NodeId mom_x = g.sub(
            g.add(g.add(g.mul(f.out(0), ux), g.mul(f.out(1), uy)), f.d(2, 0)),
            g.scale(inv_re, lap_u));
        NodeId mom_y = g.sub(
            g.add(g.add(g.mul(f.out(0), vx), g.mul(f.out(1), vy)), f.d(2, 1)),
            g.scale(inv_re, lap_v));
        return std::vector<NodeId>{cont, mom_x, mom_y};
    };
    BcSet inlet;
    inlet.name = "inlet";
    inlet.kind = BcKind::kInlet;
    inlet.components = {0, 1};
    inlet.target = [](std::span<const double> x, std::span<double> out) {
        out[0] = 4.0 * x[1] * (1.0 - x[1]);
        out[1] = 0.0;
    };
    inlet.sample = [](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        x[0] = 0.0;
        x[1] = u(rng);
    };
    BcSet outlet;
    outlet.name = "outlet";
    outlet.kind = BcKind::kOutlet;
    outlet.components = {2};
    outlet.target = const_target({0.0});
    outlet.sample = [](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(0.0, 2.0);
        x[0] = 4.0;
        x[1] = u(rng);
    };
    BcSet walls;
    walls.name = "noslip";
    walls.kind = BcKind::kNoSlip;
    walls.components = {0, 1};
    walls.target = const_target({0.0, 0.0});
    walls.sample = segment_sampler({{0.0, 0.0, 4.0, 0.0},    // bottom
                                    {2.0, 2.0, 4.0, 2.0},    // top, downstream of the step
                                    {0.0, 1.0, 2.0, 1.0},    // step roof
                                    {2.0, 1.0, 2.0, 2.0}});  // step face
    p.bc_sets = {inlet, outlet, walls};
    return p;
}

// ---- nD Poisson: -laplace(u) = (pi^2/4) sum sin(pi x_i / 2) on [0,1]^n ----
// Dirichlet data is the trace of the exact solution sum sin(pi x_i / 2)

PdeProblem make_poisson_nd(int dim) {
    if (dim < 1 || dim > 10) throw std::invalid_argument("poisson-nd: dimension must be 1..10");
    PdeProblem p;
    p.name = "poisson-nd-" + std::to_string(dim);
    p.input_dim = dim;
    p.lo.assign(dim, 0.0);
    p.hi.assign(dim, 1.0);
    p.residual = [dim](Field& f, std::span<const NodeId>, Graph& g) {
        NodeId lap = f.d2(0, 0, 0);
        for (int i = 1; i < dim; ++i) lap = g.add(lap, f.d2(0, i, i));
        NodeId force = g.constant(0.0);
        for (int i = 0; i < dim; ++i) force = g.add(force, g.sin(g.scale(0.5 * kPi, f.x[i])));
        force = g.scale(0.25 * kPi * kPi, force);
        return std::vector<NodeId>{g.sub(g.neg(lap), force)};
    };
    auto exact = [dim](std::span<const double> x) {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += std::sin(0.5 * kPi * x[i]);
        return s;
    };
    p.reference = [exact](std::span<const double> x, std::span<double> out) { out[0] = exact(x); };
    p.analytic_expr = [dim](std::span<const NodeId> x, Graph& g) {
        NodeId s = g.constant(0.0);
        for (int i = 0; i < dim; ++i) s = g.add(s, g.sin(g.scale(0.5 * kPi, x[i])));
        return std::vector<NodeId>{s};
    };
    BcSet faces;
    faces.name = "bc";
    faces.target = [exact](std::span<const double> x, std::span<double> out) { out[0] = exact(x); };
    faces.sample = [dim](std::mt19937_64& rng, std::span<double> x) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < dim; ++i) x[i] = u(rng);
        auto face = rng() % (2 * static_cast<std::uint64_t>(dim));
        x[face / 2] = (face & 1) ? 1.0 : 0.0;
    };
    p.bc_sets = {faces};
    return p;
}

// ---- Inverse Lorenz: fit (x,y,z)(t) and recover (alpha, beta, rho) ----

PdeProblem make_inverse_lorenz() {
    PdeProblem p;
    p.name = "i-lorenz";
    p.input_dim = 1;  // t
    p.output_dim = 3;
    p.lo = {0.0};
    p.hi = {3.0};
    p.inverse_coeffs = {{"alpha", 10.0, 0.0}, {"beta", 8.0 / 3.0, 0.0}, {"rho", 15.0, 0.0}};
    p.residual = [](Field& f, std::span<const NodeId> c, Graph& g) {
        NodeId x = f.out(0), y = f.out(1), z = f.out(2);
        NodeId r1 = g.sub(f.d(0, 0), g.mul(c[0], g.sub(y, x)));
        NodeId r2 = g.sub(f.d(1, 0), g.sub(g.mul(x, g.sub(c[2], z)), y));
        NodeId r3 = g.sub(f.d(2, 0), g.sub(g.mul(x, y), g.mul(c[1], z)));
        return std::vector<NodeId>{r1, r2, r3};
    };
    // dense RK4 reference, linearly interpolated in t
    auto traj = std::make_shared<std::vector<std::array<double, 3>>>(
        rk4_trajectory(LorenzParams{}, kLorenzStart, 3.0, 1e-3));
    p.reference = [traj](std::span<const double> x, std::span<double> out) {
        double s = std::min(std::max(x[0], 0.0), 3.0) / 1e-3;
        auto i = static_cast<std::size_t>(s);
        if (i + 1 >= traj->size()) i = traj->size() - 2;
        double w = s - static_cast<double>(i);
        for (int c = 0; c < 3; ++c)
            out[c] = (1.0 - w) * (*traj)[i][c] + w * (*traj)[i + 1][c];
    };
    BcSet ic;
    ic.name = "ic";
    ic.components = {0, 1, 2};
    ic.target = const_target({kLorenzStart[0], kLorenzStart[1], kLorenzStart[2]});
    ic.sample = [](std::mt19937_64&, std::span<double> x) { x[0] = 0.0; };
    p.bc_sets = {ic};
    return p;
}

}  // namespace

bool PdeProblem::inside(std::span<const double> x) const {
    for (int i = 0; i < input_dim; ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    for (const auto& d : disk_holes) {
        double dx = x[0] - d.cx, dy = x[1] - d.cy;
        if (dx * dx + dy * dy <= d.r * d.r) return false;
    }
    for (const auto& r : rect_holes)
        if (x[0] >= r.x0 && x[0] <= r.x1 && x[1] >= r.y0 && x[1] <= r.y1) return false;
    return true;
}

PdeProblem make_problem(const std::string& name) {
    if (name == "wave") return make_wave();
    if (name == "diffusion") return make_diffusion();
    if (name == "heat") return make_heat();
    if (name == "poisson-holes") return make_poisson_holes();
    if (name == "burgers") return make_burgers(false);
    if (name == "i-burgers") return make_burgers(true);
    if (name == "ns-step") return make_ns_step();
    if (name == "i-lorenz") return make_inverse_lorenz();
    if (name.rfind("poisson-nd-", 0) == 0) {
        int d = std::stoi(name.substr(11));
        return make_poisson_nd(d);
    }
    throw std::invalid_argument("unknown problem: " + name);
}

std::vector<std::string> problem_names() {
    return {"wave",    "diffusion", "heat",        "poisson-holes", "burgers",
            "ns-step", "poisson-nd-<D>", "i-burgers", "i-lorenz"};
}

}  // namespace featlab::pde
