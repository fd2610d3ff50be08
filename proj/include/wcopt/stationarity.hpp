#pragma once

#include "wcopt/switching.hpp"

namespace wcopt {

// Outcome of one near-stationarity measurement: how far the candidate sits
// from the (unique) minimizer of its own proximal subproblem.
struct StationarityReport {
    double distance_estimate = kNaN;   // ||x - x_hat_est||
    double subproblem_accuracy = kNaN; // eps_meter used for the solve
    double solver_slack_bound = kNaN;  // ||x_hat_est - x_hat|| <= eps_meter sqrt(2/(rho_hat-rho))
    double g_at_candidate = kNaN;
    std::optional<double> lambda_estimate;
    Vector prox_point_estimate;
};

// Solves the candidate's proximal subproblem to high accuracy with the
// deterministic switching oracle and reports the distance to the estimated
// minimizer. Strong convexity pins the estimate's own error to
// eps_meter * sqrt(2 / (rho_hat - rho)), included in the report.
inline StationarityReport measure_stationarity(const ConstrainedProblem& p,
                                               const Vector& x, double rho_hat,
                                               double eps_meter,
                                               long long budget_multiplier = 4) {
    if (!(rho_hat > p.rho))
        throw std::invalid_argument("measure_stationarity: rho_hat must exceed rho");
    if (!(eps_meter > 0.0))
        throw std::invalid_argument("measure_stationarity: eps_meter must be positive");
    if (budget_multiplier < 1)
        throw std::invalid_argument("measure_stationarity: budget_multiplier >= 1");

    StationarityReport rep;
    rep.subproblem_accuracy = eps_meter;
    if (!p.constraints.empty()) {
        rep.g_at_candidate = constraint_max(p, x).value;
        if (rep.g_at_candidate > eps_meter * eps_meter + 1e-12)
            throw std::invalid_argument(
                "measure_stationarity: infeasible candidate (g(x) = " +
                std::to_string(rep.g_at_candidate) + " exceeds eps_meter^2)");
    }

    SwitchingConfig cfg;
    cfg.eps_hat = eps_meter;
    cfg.K_override = budget_multiplier * switching_iteration_count(p.M, rho_hat, p.rho,
                                                                   diameter(p.domain),
                                                                   eps_meter);
    OracleReport solve = run_switching(p, ProxCenter{x, rho_hat}, cfg);

    rep.prox_point_estimate = std::move(solve.x);
    rep.distance_estimate = dist(x, rep.prox_point_estimate);
    rep.solver_slack_bound = eps_meter * std::sqrt(2.0 / (rho_hat - p.rho));
    return rep;
}

// Dual-variable proxy from the queue method: ||Q_K|| / V. Diagnostic only;
// callers may compare it against multiplier_bound when Slater constants are
// known and flag (not assert) an excess.
inline double multiplier_estimate_from_queues(const OracleReport& report) {
    if (!(report.queue_weight_V > 0.0) || report.final_queues.empty())
        throw std::invalid_argument(
            "multiplier_estimate_from_queues: report does not carry queue state");
    return report.final_queue_norm / report.queue_weight_V;
}

}  // namespace wcopt
