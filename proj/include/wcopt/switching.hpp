#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "wcopt/prox.hpp"
#include "wcopt/report.hpp"

namespace wcopt {

struct SwitchingConfig {
    double eps_hat = 0.0;
    std::optional<long long> K_override;
    bool record_trace = false;
    // F(x_hat) when known from an independent route; enables fgap_vs_reference
    std::optional<double> reference_optimum_value;
};

// K = ceil( 4 (M^2 + rho_hat D^2) / ((rho_hat - rho) eps_hat^2) ), clamped to >= 1.
inline long long switching_iteration_count(double M, double rho_hat, double rho,
                                           double D, double eps_hat) {
    if (!(rho_hat > rho))
        throw std::invalid_argument("switching_iteration_count: rho_hat must exceed rho");
    if (!(eps_hat > 0.0))
        throw std::invalid_argument("switching_iteration_count: eps_hat must be positive");
    const double raw =
        4.0 * (M * M + rho_hat * D * D) / ((rho_hat - rho) * eps_hat * eps_hat);
    if (raw >= 9.0e18)
        throw std::overflow_error("switching_iteration_count: iteration count overflow");
    const long long k = static_cast<long long>(std::ceil(raw));
    return k < 1 ? 1 : k;
}

// Single-loop switching subgradient method for the strongly convex subproblem.
// Steps along F' while the shifted constraint is within eps_hat^2, and along
// G' otherwise; the output is the (k+1)-weighted average of the feasible
// iterates, which keeps G(output) <= eps_hat^2 by convexity. With the default
// iteration count the objective gap F(output) - F(x_hat) <= eps_hat^2 holds
// deterministically.
inline OracleReport run_switching(const ConstrainedProblem& p, const ProxCenter& c,
                                  const SwitchingConfig& cfg) {
    if (!(c.rho_hat > p.rho))
        throw std::invalid_argument("run_switching: rho_hat must exceed problem rho");
    if (!(cfg.eps_hat > 0.0))
        throw std::invalid_argument("run_switching: eps_hat must be positive");

    const double mu = c.rho_hat - p.rho;
    const double D = diameter(p.domain);
    const double eps_sq = cfg.eps_hat * cfg.eps_hat;
    const bool unconstrained = p.constraints.empty();
    const long long K =
        cfg.K_override ? std::max<long long>(1, *cfg.K_override)
                       : switching_iteration_count(p.M, c.rho_hat, p.rho, D, cfg.eps_hat);

    OracleReport rep;
    rep.eps_hat = cfg.eps_hat;
    rep.iterations = static_cast<std::size_t>(K);
    if (cfg.record_trace) rep.inner_trace.emplace();

    Vector z = c.center;
    Vector grad(z.size());
    Vector avg_acc(z.size(), 0.0);
    double weight = 0.0;

    for (long long k = 0; k < K; ++k) {
        const double gamma = 2.0 / (mu * static_cast<double>(k + 2));
        bool objective_step = true;
        double Gz = -std::numeric_limits<double>::infinity();
        if (!unconstrained) {
            Gz = shifted_constraint_value(p, c, z);
            rep.evals.add_constraint_eval();
            objective_step = Gz <= eps_sq;
        }
        if (objective_step) {
            const double w = static_cast<double>(k + 1);
            weight += w;
            axpy(w, z, avg_acc);
            shifted_objective_subgrad(p, c, z, grad);
            rep.evals.add_objective_eval();
            ++rep.objective_steps;
        } else {
            // subgradient at the same point as the value check: counted once
            shifted_constraint_subgrad(p, c, z, grad);
            ++rep.constraint_steps;
        }
        if (cfg.record_trace)
            rep.inner_trace->push_back(
                {static_cast<std::size_t>(k), z, Gz, objective_step});
        axpy(-gamma, grad, z);
        project_in_place(p.domain, z);
    }

    if (weight <= 0.0)
        throw std::runtime_error(
            "switching oracle stalled: no iterate satisfied the constraint tolerance "
            "(start the solve from an eps_hat^2-feasible center)");

    rep.x = std::move(avg_acc);
    scale(1.0 / weight, rep.x);

    // Runtime certificate from the convergence argument: valid for any K, and
    // it collapses to eps_hat^2 once K reaches the prescribed count.
    const double Kd = static_cast<double>(K);
    const double surplus = 2.0 * Kd * (p.M * p.M + c.rho_hat * D * D) / mu -
                           0.5 * Kd * (Kd + 1.0) * eps_sq;
    rep.fgap_bound = eps_sq + std::max(0.0, surplus) / weight;

    if (!unconstrained) {
        rep.achieved_G = shifted_constraint_value(p, c, rep.x);
        rep.evals.add_constraint_eval();
    }
    if (cfg.reference_optimum_value) {
        rep.fgap_vs_reference =
            shifted_objective_value(p, c, rep.x) - *cfg.reference_optimum_value;
        rep.evals.add_objective_eval();
    }
    return rep;
}

}  // namespace wcopt
