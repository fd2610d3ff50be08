#pragma once

#include <stdexcept>

#include "wcopt/problem.hpp"

namespace wcopt {

// Center and modulus of the shifted subproblem
//   minimize   F(x) = f(x)      + (rho_hat/2) ||x - center||^2
//   subject to G(x) = max_i f_i(x) + (rho_hat/2) ||x - center||^2 <= 0.
// With rho_hat > rho both F and G are (rho_hat - rho)-strongly convex.
struct ProxCenter {
    Vector center;
    double rho_hat = 0.0;
};

inline ProxCenter make_center(const ConstrainedProblem& p, Vector center,
                              double rho_hat) {
    if (!(rho_hat > p.rho))
        throw std::invalid_argument("make_center: rho_hat must exceed problem rho");
    if (!contains(p.domain, center, 1e-7))
        throw std::invalid_argument("make_center: center outside the domain");
    return ProxCenter{std::move(center), rho_hat};
}

inline double prox_shift(const ProxCenter& c, const Vector& x) {
    return 0.5 * c.rho_hat * dist_sq(x, c.center);
}

inline double shifted_objective_value(const ConstrainedProblem& p, const ProxCenter& c,
                                      const Vector& x) {
    return p.objective.value(x) + prox_shift(c, x);
}

inline double shifted_constraint_value(const ConstrainedProblem& p, const ProxCenter& c,
                                       const Vector& x) {
    return constraint_max(p, x).value + prox_shift(c, x);
}

namespace detail {
inline void add_prox_gradient(const ProxCenter& c, const Vector& x, Vector& g) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += c.rho_hat * (x[i] - c.center[i]);
}
}  // namespace detail

inline void shifted_objective_subgrad(const ConstrainedProblem& p, const ProxCenter& c,
                                      const Vector& x, Vector& out) {
    p.objective.subgrad(x, out);
    detail::add_prox_gradient(c, x, out);
}

inline void shifted_constraint_subgrad(const ConstrainedProblem& p, const ProxCenter& c,
                                       const Vector& x, Vector& out) {
    constraint_max_subgrad(p, x, out);
    detail::add_prox_gradient(c, x, out);
}

inline Vector shifted_objective_subgradient(const ConstrainedProblem& p,
                                            const ProxCenter& c, const Vector& x) {
    Vector g;
    shifted_objective_subgrad(p, c, x, g);
    return g;
}

inline Vector shifted_constraint_subgradient(const ConstrainedProblem& p,
                                             const ProxCenter& c, const Vector& x) {
    Vector g;
    shifted_constraint_subgrad(p, c, x, g);
    return g;
}

// Shifted stochastic draw for function i (i = 0 is the objective):
//   theta~ = theta_i(x) + (rho_hat/2)||x - center||^2
//   zeta~  = zeta_i(x)  + rho_hat (x - center)
inline StochasticSample shifted_stochastic_sample(const ConstrainedProblem& p,
                                                  const ProxCenter& c, const Vector& x,
                                                  std::size_t i, Rng& rng) {
    const StochasticOracle* oracle = nullptr;
    if (i == 0) {
        if (!p.objective_stochastic)
            throw std::invalid_argument("shifted_stochastic_sample: objective has no "
                                        "stochastic oracle");
        oracle = &*p.objective_stochastic;
    } else {
        if (i - 1 >= p.constraint_stochastic.size())
            throw std::invalid_argument("shifted_stochastic_sample: constraint " +
                                        std::to_string(i - 1) +
                                        " has no stochastic oracle");
        oracle = &p.constraint_stochastic[i - 1];
    }
    StochasticSample s = oracle->sample(x, rng);
    s.theta += prox_shift(c, x);
    detail::add_prox_gradient(c, x, s.zeta);
    return s;
}

// ||F'(x)|| <= M + rho_hat * D for every x in the domain
inline double shifted_subgradient_bound(const ConstrainedProblem& p, double rho_hat) {
    return p.M + rho_hat * diameter(p.domain);
}

// Bounds on the shifted stochastic estimates:
//   ||(theta~_1..theta~_m)|| <= M0 + rho_hat sqrt(m) D^2 / 2
//   ||zeta~_i||             <= M1 + rho_hat D
inline double shifted_value_bound(const ConstrainedProblem& p, double rho_hat) {
    const double D = diameter(p.domain);
    const double m = static_cast<double>(p.num_constraints());
    return p.stochastic_value_bound() + 0.5 * rho_hat * std::sqrt(m) * D * D;
}

inline double shifted_gradient_bound(const ConstrainedProblem& p, double rho_hat) {
    return p.stochastic_gradient_bound() + rho_hat * diameter(p.domain);
}

}  // namespace wcopt
