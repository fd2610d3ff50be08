// Shared test fixtures: analytic instances with closed-form solutions and
// brute-force reference oracles. Everything here is independent of the solver
// code paths it is used to check.
#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "wcopt/problems.hpp"
#include "wcopt/prox.hpp"

namespace testkit {

using wcopt::Vector;

// central finite difference of a scalar function
inline Vector fd_gradient(const std::function<double(const Vector&)>& h, const Vector& x,
                          double step = 1e-6) {
    Vector g(x.size());
    Vector xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + step;
        xm[i] = x[i] - step;
        g[i] = (h(xp) - h(xm)) / (2.0 * step);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return g;
}

inline double rel_err(const Vector& a, const Vector& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

// ---- ball-constrained quadratic family -------------------------------------
// f(y) = (cf/2)||y - p||^2 + df,  g(y) = (cg/2)||y - q||^2 - level,
// over an l2 ball. Convex (rho = 0); the prox subproblem has a closed-form
// KKT solution used as the reference optimum.
struct BallQcqp {
    wcopt::ConstrainedProblem problem;
    Vector p, q;
    double cf = 1.0, df = 0.0, cg = 1.0, level = 1.0, domain_radius = 6.0;
};

inline BallQcqp make_ball_qcqp(Vector p, Vector q, double cf, double cg, double level,
                               double df = 0.0, double domain_radius = 6.0) {
    BallQcqp inst;
    inst.p = p;
    inst.q = q;
    inst.cf = cf;
    inst.cg = cg;
    inst.level = level;
    inst.df = df;
    inst.domain_radius = domain_radius;

    auto& pr = inst.problem;
    pr.name = "ball_qcqp";
    pr.domain = wcopt::L2Ball{domain_radius};
    pr.dim = p.size();
    pr.rho = 0.0;
    pr.f_lb = df;

    pr.objective.value = [p, cf, df](const Vector& y) {
        return 0.5 * cf * wcopt::dist_sq(y, p) + df;
    };
    pr.objective.subgrad = [p, cf](const Vector& y, Vector& g) {
        g.resize(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) g[i] = cf * (y[i] - p[i]);
    };
    pr.objective.weak_convexity_modulus = 0.0;
    pr.objective.subgradient_bound = cf * (domain_radius + wcopt::norm2(p));

    wcopt::FunctionOracle con;
    con.value = [q, cg, level](const Vector& y) {
        return 0.5 * cg * wcopt::dist_sq(y, q) - level;
    };
    con.subgrad = [q, cg](const Vector& y, Vector& g) {
        g.resize(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) g[i] = cg * (y[i] - q[i]);
    };
    con.weak_convexity_modulus = 0.0;
    con.subgradient_bound = cg * (domain_radius + wcopt::norm2(q));
    pr.constraints.push_back(std::move(con));
    pr.M = std::max(pr.objective.subgradient_bound,
                    pr.constraints[0].subgradient_bound);

    // degenerate one-datum "stochastic" oracles: exact values, zero variance
    wcopt::StochasticOracle so;
    so.sample = [p, cf, df](const Vector& y, wcopt::Rng&) {
        wcopt::StochasticSample s;
        s.theta = 0.5 * cf * wcopt::dist_sq(y, p) + df;
        s.zeta.resize(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) s.zeta[i] = cf * (y[i] - p[i]);
        return s;
    };
    so.value_bound = 0.5 * cf * (domain_radius + wcopt::norm2(p)) *
                         (domain_radius + wcopt::norm2(p)) +
                     std::fabs(df);
    so.gradient_bound = pr.objective.subgradient_bound;
    pr.objective_stochastic = std::move(so);

    wcopt::StochasticOracle sc;
    sc.sample = [q, cg, level](const Vector& y, wcopt::Rng&) {
        wcopt::StochasticSample s;
        s.theta = 0.5 * cg * wcopt::dist_sq(y, q) - level;
        s.zeta.resize(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) s.zeta[i] = cg * (y[i] - q[i]);
        return s;
    };
    sc.value_bound = 0.5 * cg * (domain_radius + wcopt::norm2(q)) *
                         (domain_radius + wcopt::norm2(q)) +
                     std::fabs(level);
    sc.gradient_bound = pr.constraints[0].subgradient_bound;
    pr.constraint_stochastic.push_back(std::move(sc));

    return inst;
}

struct QcqpProxSolution {
    Vector x_hat;
    double F_at_hat = 0.0;
    double lambda = 0.0;
    bool active = false;
    bool slater_ok = false;  // the shifted feasible set has interior
};

// Closed-form minimizer of F(y) = f(y) + (rho_hat/2)||y - xc||^2 subject to
// G(y) = g(y) + (rho_hat/2)||y - xc||^2 <= 0: completing squares turns both
// into spherical quadratics, so x_hat is either the shifted objective center
// or its projection onto the shifted feasible ball.
inline QcqpProxSolution solve_qcqp_prox(const BallQcqp& inst, const Vector& xc,
                                        double rho_hat) {
    const std::size_t d = inst.p.size();
    const double af = inst.cf + rho_hat;
    const double ag = inst.cg + rho_hat;
    Vector pt(d), qt(d);
    for (std::size_t i = 0; i < d; ++i) {
        pt[i] = (inst.cf * inst.p[i] + rho_hat * xc[i]) / af;
        qt[i] = (inst.cg * inst.q[i] + rho_hat * xc[i]) / ag;
    }
    const double CG = -inst.level + 0.5 * inst.cg * wcopt::norm2_sq(inst.q) +
                      0.5 * rho_hat * wcopt::norm2_sq(xc) - 0.5 * ag * wcopt::norm2_sq(qt);

    QcqpProxSolution sol;
    sol.slater_ok = CG < 0.0;
    if (!sol.slater_ok) return sol;
    const double r_t = std::sqrt(-2.0 * CG / ag);

    const double sep = wcopt::dist(pt, qt);
    if (sep <= r_t) {
        sol.x_hat = pt;
        sol.lambda = 0.0;
        sol.active = false;
    } else {
        sol.x_hat.resize(d);
        for (std::size_t i = 0; i < d; ++i)
            sol.x_hat[i] = qt[i] + r_t * (pt[i] - qt[i]) / sep;
        sol.lambda = af * (sep - r_t) / (ag * r_t);
        sol.active = true;
    }
    sol.F_at_hat = inst.problem.objective.value(sol.x_hat) +
                   0.5 * rho_hat * wcopt::dist_sq(sol.x_hat, xc);
    return sol;
}

// ---- finite-sum stochastic toy ---------------------------------------------
// f0(x) = (1/n) sum 1/2 ||x - a_j||^2, f1(x) = (1/n) sum (b_j^T x - c_j),
// so the expectation problem is minimize 1/2||x-abar||^2 + const subject to
// bbar^T x <= cbar, with a closed-form projection solution.
struct StochasticToy {
    wcopt::ConstrainedProblem problem;
    Vector a_bar, b_bar;
    double c_bar = 0.0;
    Vector x_star;
    double violation_at(const Vector& x) const {
        return wcopt::dot(b_bar, x) - c_bar;
    }
};

inline StochasticToy make_stochastic_toy(std::size_t n, std::size_t d,
                                         std::uint64_t seed, double margin = 1.0,
                                         double radius = 10.0) {
    wcopt::Rng rng(seed);
    auto rows_a = std::make_shared<std::vector<Vector>>();
    auto rows_b = std::make_shared<std::vector<Vector>>();
    auto rows_c = std::make_shared<std::vector<double>>();

    Vector b_dir = rng.normal_vector(d);
    wcopt::scale(1.0 / wcopt::norm2(b_dir), b_dir);
    Vector a_center(d, 0.0);
    wcopt::axpy(2.0, b_dir, a_center);  // unconstrained optimum sits infeasible

    for (std::size_t j = 0; j < n; ++j) {
        Vector a(d), b(d);
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = a_center[i] + 0.5 * rng.normal();
            b[i] = b_dir[i] + 0.2 * rng.normal();
        }
        rows_a->push_back(std::move(a));
        rows_b->push_back(std::move(b));
        rows_c->push_back(0.3 * rng.normal());
    }

    StochasticToy toy;
    toy.a_bar.assign(d, 0.0);
    toy.b_bar.assign(d, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        wcopt::axpy(1.0 / n, (*rows_a)[j], toy.a_bar);
        wcopt::axpy(1.0 / n, (*rows_b)[j], toy.b_bar);
        toy.c_bar += (*rows_c)[j] / n;
    }
    // shift c_bar so that bbar^T abar - cbar = margin exactly
    toy.c_bar = wcopt::dot(toy.b_bar, toy.a_bar) - margin;
    const double shift = toy.c_bar - [&] {
        double s = 0.0;
        for (double v : *rows_c) s += v;
        return s / n;
    }();
    for (auto& v : *rows_c) v += shift;

    auto& pr = toy.problem;
    pr.name = "stochastic_toy";
    pr.domain = wcopt::L2Ball{radius};
    pr.dim = d;
    pr.rho = 0.0;
    pr.f_lb = 0.0;

    const double nn = static_cast<double>(n);
    pr.objective.value = [rows_a, nn](const Vector& x) {
        double s = 0.0;
        for (const auto& a : *rows_a) s += 0.5 * wcopt::dist_sq(x, a);
        return s / nn;
    };
    pr.objective.subgrad = [rows_a, nn](const Vector& x, Vector& g) {
        g.assign(x.size(), 0.0);
        for (const auto& a : *rows_a) {
            for (std::size_t i = 0; i < x.size(); ++i) g[i] += (x[i] - a[i]) / nn;
        }
    };
    pr.objective.dataset_size = n;

    double max_a = 0.0, max_b = 0.0, max_c = 0.0;
    for (const auto& a : *rows_a) max_a = std::max(max_a, wcopt::norm2(a));
    for (const auto& b : *rows_b) max_b = std::max(max_b, wcopt::norm2(b));
    for (double v : *rows_c) max_c = std::max(max_c, std::fabs(v));
    pr.objective.subgradient_bound = radius + max_a;
    pr.objective.weak_convexity_modulus = 0.0;

    wcopt::FunctionOracle con;
    con.value = [rows_b, rows_c, nn](const Vector& x) {
        double s = 0.0;
        for (std::size_t j = 0; j < rows_b->size(); ++j)
            s += wcopt::dot((*rows_b)[j], x) - (*rows_c)[j];
        return s / nn;
    };
    con.subgrad = [rows_b, nn](const Vector& x, Vector& g) {
        g.assign(x.size(), 0.0);
        for (const auto& b : *rows_b) wcopt::axpy(1.0 / nn, b, g);
    };
    con.weak_convexity_modulus = 0.0;
    con.subgradient_bound = max_b;
    con.dataset_size = n;
    pr.constraints.push_back(std::move(con));
    pr.M = std::max(pr.objective.subgradient_bound, max_b);

    wcopt::StochasticOracle so;
    so.sample = [rows_a](const Vector& x, wcopt::Rng& r) {
        const auto& a = (*rows_a)[r.uniform_index(rows_a->size())];
        wcopt::StochasticSample s;
        s.theta = 0.5 * wcopt::dist_sq(x, a);
        s.zeta.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) s.zeta[i] = x[i] - a[i];
        return s;
    };
    so.value_bound = 0.5 * (radius + max_a) * (radius + max_a);
    so.gradient_bound = radius + max_a;
    so.dataset_size = n;
    pr.objective_stochastic = std::move(so);

    wcopt::StochasticOracle sc;
    sc.sample = [rows_b, rows_c](const Vector& x, wcopt::Rng& r) {
        const std::size_t j = r.uniform_index(rows_b->size());
        wcopt::StochasticSample s;
        s.theta = wcopt::dot((*rows_b)[j], x) - (*rows_c)[j];
        s.zeta = (*rows_b)[j];
        return s;
    };
    sc.value_bound = max_b * radius + max_c;
    sc.gradient_bound = max_b;
    sc.dataset_size = n;
    pr.constraint_stochastic.push_back(std::move(sc));

    // closed-form optimum of the expectation problem (constraint active by
    // the margin construction): project abar onto the halfspace
    toy.x_star = toy.a_bar;
    const double viol = wcopt::dot(toy.b_bar, toy.a_bar) - toy.c_bar;
    if (viol > 0.0)
        wcopt::axpy(-viol / wcopt::norm2_sq(toy.b_bar), toy.b_bar, toy.x_star);
    return toy;
}

// ---- 1-d double-well constraint ---------------------------------------------
// g(x) = (x^2 - 1)^2 + 0.1 on the box [0, 2]: globally infeasible (g >= 0.1),
// with the trapped local minimum g(1) = 0.1.
inline wcopt::ConstrainedProblem make_double_well() {
    wcopt::ConstrainedProblem p;
    p.name = "double_well";
    p.domain = wcopt::Box{{0.0}, {2.0}};
    p.dim = 1;
    p.rho = 4.0;   // g'' = 12 x^2 - 4 >= -4
    p.M = 24.0;    // |g'| = |4x(x^2-1)| <= 24 on [0,2]
    p.f_lb = 0.0;

    p.objective.value = [](const Vector& x) { return 0.5 * x[0] * x[0]; };
    p.objective.subgrad = [](const Vector& x, Vector& g) { g = {x[0]}; };
    p.objective.weak_convexity_modulus = 0.0;
    p.objective.subgradient_bound = 2.0;

    wcopt::FunctionOracle con;
    con.value = [](const Vector& x) {
        const double t = x[0] * x[0] - 1.0;
        return t * t + 0.1;
    };
    con.subgrad = [](const Vector& x, Vector& g) {
        g = {4.0 * x[0] * (x[0] * x[0] - 1.0)};
    };
    con.weak_convexity_modulus = 4.0;
    con.subgradient_bound = 24.0;
    p.constraints.push_back(std::move(con));
    return p;
}

// ---- dense grid searches on the l1 ball (2-d) --------------------------------

struct GridMin {
    double value = std::numeric_limits<double>::infinity();
    Vector arg{0.0, 0.0};
};

// minimize `objective` over {x in l1 ball : feasibility(x) <= level}
inline GridMin grid_search_l1(double radius, double resolution,
                              const std::function<double(const Vector&)>& objective,
                              const std::function<double(const Vector&)>& feasibility,
                              double level) {
    GridMin best;
    const long long steps = std::llround(radius / resolution);
    Vector x(2);
    for (long long i = -steps; i <= steps; ++i) {
        x[0] = static_cast<double>(i) * resolution;
        const double rem = radius - std::fabs(x[0]);
        const long long jmax = std::llround(rem / resolution);
        for (long long j = -jmax; j <= jmax; ++j) {
            x[1] = static_cast<double>(j) * resolution;
            if (feasibility(x) > level) continue;
            const double v = objective(x);
            if (v < best.value) {
                best.value = v;
                best.arg = x;
            }
        }
    }
    return best;
}

}  // namespace testkit
