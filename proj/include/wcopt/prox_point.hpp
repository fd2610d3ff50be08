#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "wcopt/stochastic.hpp"
#include "wcopt/switching.hpp"

namespace wcopt {

enum class OracleKind { switching, stochastic };

// eps_hat = min{ 1, sqrt((rho_hat-rho)/4) ((M+rho_hat D)/sqrt(2 sigma (rho_hat-rho)) + 1)^(-1/2) } eps.
// Pass sigma_eps = +inf for unconstrained runs; the multiplier term vanishes.
inline double subproblem_tolerance(double epsilon, double M, double rho_hat, double rho,
                                   double D, double sigma_eps) {
    if (!(rho_hat > rho))
        throw std::invalid_argument("subproblem_tolerance: rho_hat must exceed rho");
    if (!(sigma_eps > 0.0))
        throw std::invalid_argument("subproblem_tolerance: sigma_eps must be positive");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("subproblem_tolerance: epsilon must be positive");
    const double mu = rho_hat - rho;
    const double lam = (M + rho_hat * D) / std::sqrt(2.0 * sigma_eps * mu);
    const double factor = std::sqrt(mu / 4.0) / std::sqrt(lam + 1.0);
    return std::min(1.0, factor) * epsilon;
}

// T >= 4 (f(x0) - f_lb) / (eps^2 (rho_hat - rho)), clamped to >= 1.
inline long long required_outer_iterations(double f_x0, double f_lb, double epsilon,
                                           double rho_hat, double rho) {
    if (!(rho_hat > rho))
        throw std::invalid_argument("required_outer_iterations: rho_hat must exceed rho");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("required_outer_iterations: epsilon must be positive");
    if (!std::isfinite(f_lb))
        throw std::invalid_argument("required_outer_iterations: finite f_lb required");
    if (f_x0 < f_lb)
        throw std::invalid_argument("required_outer_iterations: f(x0) below f_lb");
    const double raw = 4.0 * (f_x0 - f_lb) / (epsilon * epsilon * (rho_hat - rho));
    if (raw >= 9.0e18)
        throw std::overflow_error("required_outer_iterations: overflow");
    const long long T = static_cast<long long>(std::ceil(raw));
    return T < 1 ? 1 : T;
}

// Uniform bound on the subproblem KKT multiplier: (M + rho_hat D) / sqrt(2 sigma (rho_hat - rho)).
inline double multiplier_bound(double M, double rho_hat, double D, double sigma_eps,
                               double rho) {
    if (!(rho_hat > rho))
        throw std::invalid_argument("multiplier_bound: rho_hat must exceed rho");
    if (!(sigma_eps > 0.0))
        throw std::invalid_argument("multiplier_bound: sigma_eps must be positive");
    return (M + rho_hat * D) / std::sqrt(2.0 * sigma_eps * (rho_hat - rho));
}

struct ProxPointConfig {
    double epsilon = 0.0;
    double delta = 0.1;
    double rho_hat = 0.0;
    std::optional<long long> T_override;
    std::optional<double> eps_hat_override;
    std::optional<long long> inner_K;  // subproblem iterations; formula / 1/eps_hat^2 otherwise
    OracleKind oracle_kind = OracleKind::switching;
    std::uint64_t seed = 0;
    std::optional<long long> record_stationarity_every;
    // measurement hook, wired by the harness to the stationarity meter
    std::function<double(const Vector&)> stationarity_probe;
};

struct TraceRow {
    long long iter = 0;
    double data_passes = 0.0;
    double wall_seconds = 0.0;
    double f_value = kNaN;
    double g_value = kNaN;
    double oracle_fgap_bound = kNaN;
    double stationarity_estimate = kNaN;  // NaN when not sampled
};

struct RunTrace {
    std::vector<TraceRow> rows;  // rows 0..T for iterates x_0..x_T
    std::vector<std::string> warnings;
    double eps_hat = kNaN;
    double lambda_bound = kNaN;   // NaN when Slater constants are unknown
    long long descent_violations = 0;  // f(x_{t+1}) > f(x_t) + (1+Lambda) eps_hat^2
    // summaries over the sampled stationarity estimates; the convergence
    // guarantee is stated for the mean of the squares, the distance itself is
    // what the stationarity definition uses, so both are reported
    double stationarity_mean_distance = kNaN;
    double stationarity_mean_squared = kNaN;
    EvalCounts evals;
};

struct ProxPointResult {
    Vector x_final;             // x_T
    Vector x_R;                 // uniformly sampled iterate
    long long R = 0;
    long long T = 0;
    RunTrace trace;
    std::vector<Vector> iterates;  // x_0 .. x_T
};

// Outer loop: T calls of the chosen subproblem oracle, each centered at the
// current iterate, followed by a uniform draw R from {0,...,T-1}. Requires an
// eps^2-feasible start; use feasibility_restore to produce one.
inline ProxPointResult run_prox_point(const ConstrainedProblem& p, const Vector& x0,
                                      const ProxPointConfig& cfg) {
    if (!(cfg.rho_hat > p.rho))
        throw std::invalid_argument("run_prox_point: rho_hat must exceed problem rho");
    if (!(cfg.epsilon > 0.0))
        throw std::invalid_argument("run_prox_point: epsilon must be positive");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
        throw std::invalid_argument("run_prox_point: delta must lie in (0,1)");
    if (!contains(p.domain, x0, 1e-7))
        throw std::invalid_argument("run_prox_point: x0 outside the domain");
    const bool constrained = !p.constraints.empty();
    if (cfg.oracle_kind == OracleKind::stochastic && !p.has_stochastic())
        throw std::invalid_argument(
            "run_prox_point: stochastic oracle requires stochastic estimators for every "
            "function");

    ProxPointResult res;
    RunTrace& trace = res.trace;

    double sigma_eps = std::numeric_limits<double>::infinity();
    if (p.slater) sigma_eps = p.slater->sigma_eps;
    if (constrained && !p.slater && !cfg.eps_hat_override)
        throw std::invalid_argument(
            "run_prox_point: sigma_eps unknown; supply eps_hat explicitly");

    const double D = diameter(p.domain);
    const double eps_hat =
        cfg.eps_hat_override
            ? *cfg.eps_hat_override
            : subproblem_tolerance(cfg.epsilon, p.M, cfg.rho_hat, p.rho, D, sigma_eps);
    if (!(eps_hat > 0.0))
        throw std::invalid_argument("run_prox_point: eps_hat must be positive");
    trace.eps_hat = eps_hat;

    if (p.slater) {
        trace.lambda_bound = multiplier_bound(p.M, cfg.rho_hat, D, sigma_eps, p.rho);
        if (cfg.rho_hat > p.rho + p.slater->rho_eps)
            trace.warnings.push_back(
                "rho_hat exceeds rho + rho_eps: the multiplier bound and the descent "
                "guarantee no longer apply");
    }

    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    };

    double f_cur = p.objective.value(x0);
    trace.evals.add_objective_eval();
    double g_cur = kNaN;
    if (constrained) {
        g_cur = constraint_max(p, x0).value;
        trace.evals.add_constraint_eval();
        const double eps_sq = cfg.epsilon * cfg.epsilon;
        if (g_cur > eps_sq + 1e-12)
            throw std::invalid_argument(
                "run_prox_point: x0 is not eps^2-feasible (g(x0) = " +
                std::to_string(g_cur) + "); run feasibility_restore first");
    }

    const long long T = cfg.T_override
                            ? std::max<long long>(1, *cfg.T_override)
                            : required_outer_iterations(f_cur, p.f_lb, cfg.epsilon,
                                                        cfg.rho_hat, p.rho);
    res.T = T;

    Rng rng(cfg.seed);
    Vector x = x0;
    res.iterates.push_back(x);
    trace.rows.push_back({0, trace.evals.data_passes, elapsed(), f_cur, g_cur, kNaN,
                          kNaN});

    // descent certificate threshold f(x_{t+1}) <= f(x_t) + (1 + Lambda) eps_hat^2
    const double descent_allowance =
        std::isfinite(trace.lambda_bound)
            ? (1.0 + trace.lambda_bound) * eps_hat * eps_hat
            : std::numeric_limits<double>::infinity();

    const long long default_stoch_K =
        static_cast<long long>(std::ceil(1.0 / (eps_hat * eps_hat)));

    for (long long t = 0; t < T; ++t) {
        const ProxCenter center{x, cfg.rho_hat};
        OracleReport rep;
        if (cfg.oracle_kind == OracleKind::switching) {
            SwitchingConfig scfg;
            scfg.eps_hat = eps_hat;
            scfg.K_override = cfg.inner_K;
            rep = run_switching(p, center, scfg);
        } else {
            StochasticConfig scfg;
            scfg.K = cfg.inner_K ? *cfg.inner_K : default_stoch_K;
            scfg.delta = cfg.delta / static_cast<double>(T);
            rep = run_stochastic(p, center, scfg, rng);
            if (p.slater) {
                rep.fgap_bound = stochastic_objective_gap_bound(
                    D, shifted_value_bound(p, cfg.rho_hat),
                    shifted_gradient_bound(p, cfg.rho_hat),
                    static_cast<double>(p.num_constraints()), sigma_eps,
                    static_cast<double>(scfg.K), scfg.delta);
            }
        }
        trace.evals.merge(rep.evals);
        x = std::move(rep.x);

        const double f_next = p.objective.value(x);
        trace.evals.add_objective_eval();
        double g_next = kNaN;
        if (constrained) {
            g_next = constraint_max(p, x).value;
            trace.evals.add_constraint_eval();
        }
        if (f_next > f_cur + descent_allowance) ++trace.descent_violations;
        f_cur = f_next;
        g_cur = g_next;

        TraceRow row{t + 1, trace.evals.data_passes, elapsed(), f_cur, g_cur,
                     rep.fgap_bound, kNaN};
        if (cfg.stationarity_probe && cfg.record_stationarity_every &&
            *cfg.record_stationarity_every > 0 &&
            (t + 1) % *cfg.record_stationarity_every == 0) {
            row.stationarity_estimate = cfg.stationarity_probe(x);
        }
        trace.rows.push_back(row);
        res.iterates.push_back(x);
    }

    double stat_sum = 0.0, stat_sq_sum = 0.0;
    std::size_t stat_n = 0;
    for (const auto& row : trace.rows) {
        if (!std::isnan(row.stationarity_estimate)) {
            stat_sum += row.stationarity_estimate;
            stat_sq_sum += row.stationarity_estimate * row.stationarity_estimate;
            ++stat_n;
        }
    }
    if (stat_n > 0) {
        trace.stationarity_mean_distance = stat_sum / static_cast<double>(stat_n);
        trace.stationarity_mean_squared = stat_sq_sum / static_cast<double>(stat_n);
    }

    res.R = static_cast<long long>(rng.uniform_index(static_cast<std::size_t>(T)));
    res.x_R = res.iterates[static_cast<std::size_t>(res.R)];
    res.x_final = res.iterates.back();
    return res;
}

enum class FeasStatus { feasible, stationary_infeasible };

struct FeasOptions {
    long long budget = 50;  // outer iterations
    std::optional<double> rho_hat;
    std::optional<long long> inner_K;
    std::uint64_t seed = 0;
};

struct FeasResult {
    Vector x;
    FeasStatus status = FeasStatus::stationary_infeasible;
    double g_value = kNaN;
    long long oracle_calls = 0;
    RunTrace trace;
};

// Phase-1 restoration: proximal point steps on min_x g(x) over the domain
// (the m = 0 path of the switching oracle). Stops at the first eps^2-feasible
// iterate; otherwise the final iterate is a near-stationary point of g that
// certifies failure to restore feasibility within the budget.
inline FeasResult feasibility_restore(const ConstrainedProblem& p, const Vector& x_start,
                                      double epsilon, const FeasOptions& opt = {}) {
    if (opt.budget < 1)
        throw std::invalid_argument("feasibility_restore: budget must be >= 1");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("feasibility_restore: epsilon must be positive");

    FeasResult res;
    res.x = project(p.domain, x_start);
    if (p.constraints.empty()) {
        res.status = FeasStatus::feasible;  // no functional constraint to restore
        return res;
    }

    const double eps_sq = epsilon * epsilon;
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    };

    // unconstrained problem: minimize g itself
    ConstrainedProblem q;
    q.objective.value = [&p](const Vector& x) { return constraint_max(p, x).value; };
    q.objective.subgrad = [&p](const Vector& x, Vector& g) {
        constraint_max_subgrad(p, x, g);
    };
    q.objective.weak_convexity_modulus = p.rho;
    q.objective.subgradient_bound = p.M;
    q.domain = p.domain;
    q.dim = p.dim;
    q.rho = p.rho;
    q.M = p.M;
    q.name = p.name + "/restoration";

    const double rho_hat = opt.rho_hat ? *opt.rho_hat : (p.rho > 0.0 ? 2.0 * p.rho : 1.0);
    if (!(rho_hat > p.rho))
        throw std::invalid_argument("feasibility_restore: rho_hat must exceed rho");
    const double eps_hat =
        subproblem_tolerance(epsilon, p.M, rho_hat, p.rho, diameter(p.domain),
                             std::numeric_limits<double>::infinity());
    res.trace.eps_hat = eps_hat;

    double g_cur = q.objective.value(res.x);
    res.trace.evals.add_constraint_eval();
    res.trace.rows.push_back(
        {0, res.trace.evals.data_passes, elapsed(), kNaN, g_cur, kNaN, kNaN});
    res.g_value = g_cur;
    if (g_cur <= eps_sq) {
        res.status = FeasStatus::feasible;  // zero oracle calls
        return res;
    }

    for (long long t = 0; t < opt.budget; ++t) {
        SwitchingConfig scfg;
        scfg.eps_hat = eps_hat;
        scfg.K_override = opt.inner_K;
        OracleReport rep = run_switching(q, ProxCenter{res.x, rho_hat}, scfg);
        res.trace.evals.merge(rep.evals);
        res.x = std::move(rep.x);
        ++res.oracle_calls;

        g_cur = q.objective.value(res.x);
        res.trace.evals.add_constraint_eval();
        res.trace.rows.push_back({t + 1, res.trace.evals.data_passes, elapsed(), kNaN,
                                  g_cur, rep.fgap_bound, kNaN});
        res.g_value = g_cur;
        if (g_cur <= eps_sq) {
            res.status = FeasStatus::feasible;
            return res;
        }
    }
    res.status = FeasStatus::stationary_infeasible;
    return res;
}

}  // namespace wcopt
