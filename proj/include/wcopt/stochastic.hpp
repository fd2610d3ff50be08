#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "wcopt/prox.hpp"
#include "wcopt/report.hpp"

namespace wcopt {

// Virtual-queue state of the online stochastic subgradient method. Q_i >= 0
// accumulates the shifted violation of constraint i and acts as its dynamic
// dual weight; V = sqrt(K) and alpha = K at initialization.
struct QueueState {
    Vector Q;
    double V = 0.0;
    double alpha = 0.0;
    long long K = 0;
};

inline QueueState make_queue_state(std::size_t m, long long K) {
    if (K < 1) throw std::invalid_argument("make_queue_state: K must be >= 1");
    QueueState q;
    q.Q.assign(m, 0.0);
    q.K = K;
    q.V = std::sqrt(static_cast<double>(K));
    q.alpha = static_cast<double>(K);
    return q;
}

struct StochasticStepResult {
    Vector z_next;
    QueueState queues;
};

// One update: draw shifted samples for the objective and every constraint,
// move z by the closed-form minimizer of the proximal linearization
//   argmin_z (V zeta~_0 + sum_i Q_i zeta~_i)^T (z - z_k) + alpha ||z - z_k||^2
// over the domain (a projected step of length 1/(2 alpha)), then update the
// queues with the drift term clamped at zero.
inline StochasticStepResult stochastic_step(const ConstrainedProblem& p,
                                            const ProxCenter& c, const Vector& z_k,
                                            const QueueState& q, Rng& rng) {
    const std::size_t m = p.num_constraints();
    if (q.Q.size() != m) throw std::invalid_argument("stochastic_step: queue size != m");

    StochasticSample obj = shifted_stochastic_sample(p, c, z_k, 0, rng);
    std::vector<StochasticSample> con(m);
    for (std::size_t i = 0; i < m; ++i)
        con[i] = shifted_stochastic_sample(p, c, z_k, i + 1, rng);

    Vector dir = obj.zeta;
    scale(q.V, dir);
    for (std::size_t i = 0; i < m; ++i) axpy(q.Q[i], con[i].zeta, dir);

    StochasticStepResult out;
    out.z_next = z_k;
    axpy(-1.0 / (2.0 * q.alpha), dir, out.z_next);
    project_in_place(p.domain, out.z_next);

    out.queues = q;
    Vector delta(z_k.size());
    for (std::size_t j = 0; j < delta.size(); ++j) delta[j] = out.z_next[j] - z_k[j];
    for (std::size_t i = 0; i < m; ++i) {
        const double drift = out.queues.Q[i] + con[i].theta + dot(con[i].zeta, delta);
        out.queues.Q[i] = drift > 0.0 ? drift : 0.0;
    }
    return out;
}

struct StochasticConfig {
    long long K = 0;
    double delta = 0.1;  // confidence budget for the reported bound
    // invoked every checkpoint_every iterations with the running average
    long long checkpoint_every = 0;
    std::function<void(long long, const Vector&, const EvalCounts&)> checkpoint;
};

namespace detail {

inline OracleReport run_queue_method(const ConstrainedProblem& p, const ProxCenter& c,
                                     const Vector& z0, const StochasticConfig& cfg,
                                     Rng& rng) {
    if (cfg.K < 1) throw std::invalid_argument("run_stochastic: K must be >= 1");
    if (!p.objective_stochastic ||
        p.constraint_stochastic.size() != p.num_constraints())
        throw std::invalid_argument(
            "run_stochastic: every function needs a stochastic oracle");

    const std::size_t m = p.num_constraints();
    QueueState q = make_queue_state(m, cfg.K);

    OracleReport rep;
    rep.iterations = static_cast<std::size_t>(cfg.K);
    rep.queue_weight_V = q.V;
    rep.max_queue_norm = 0.0;

    Vector z = z0;
    Vector avg(z.size(), 0.0);

    const std::size_t obj_n = p.objective_stochastic->dataset_size;
    for (long long k = 0; k < cfg.K; ++k) {
        axpy(1.0, z, avg);  // output averages z_0 .. z_{K-1}; z_K is dropped
        auto step = stochastic_step(p, c, z, q, rng);
        z = std::move(step.z_next);
        q = std::move(step.queues);
        rep.evals.add_sample(obj_n);
        for (std::size_t i = 0; i < m; ++i)
            rep.evals.add_sample(p.constraint_stochastic[i].dataset_size);
        rep.max_queue_norm = std::max(rep.max_queue_norm, norm2(q.Q));
        if (cfg.checkpoint && cfg.checkpoint_every > 0 &&
            ((k + 1) % cfg.checkpoint_every == 0 || k + 1 == cfg.K)) {
            Vector running = avg;
            scale(1.0 / static_cast<double>(k + 1), running);
            cfg.checkpoint(k + 1, running, rep.evals);
        }
    }

    rep.x = std::move(avg);
    scale(1.0 / static_cast<double>(cfg.K), rep.x);
    rep.final_queues = q.Q;
    rep.final_queue_norm = norm2(q.Q);

    // max_i F_i at the output, measured exactly with the deterministic oracles
    if (m > 0) {
        rep.achieved_G = shifted_constraint_value(p, c, rep.x);
        rep.evals.add_constraint_eval();
    }
    return rep;
}

}  // namespace detail

// Subproblem oracle mode: starts from the prox center.
inline OracleReport run_stochastic(const ConstrainedProblem& p, const ProxCenter& c,
                                   const StochasticConfig& cfg, Rng& rng) {
    return detail::run_queue_method(p, c, c.center, cfg, rng);
}

// Direct baseline mode on the original problem: no prox shift (rho_hat = 0).
inline OracleReport run_stochastic_baseline(const ConstrainedProblem& p,
                                            const Vector& start,
                                            const StochasticConfig& cfg, Rng& rng) {
    ProxCenter c{start, 0.0};
    return detail::run_queue_method(p, c, start, cfg, rng);
}

// ---- High-probability bound functions of the queue method ----
// All take the shifted constants M0~ and M1~; the bounds decay like
// log(K/delta)/sqrt(K).

namespace detail {
inline double queue_bound_a(double M0t, double M1t, double m, double D) {
    return M0t + std::sqrt(m) * M1t * D;
}
}  // namespace detail

inline double stochastic_lambda_tilde(double D, double M0t, double M1t, double m,
                                      double sigma_eps) {
    const double a = detail::queue_bound_a(M0t, M1t, m, D);
    return 8.0 * a * a / sigma_eps *
           std::log1p(32.0 * a * a / (sigma_eps * sigma_eps) *
                      std::exp(sigma_eps / (8.0 * a)));
}

inline double stochastic_lambda(double D, double M0t, double M1t, double m,
                                double sigma_eps, double K, double delta) {
    const double a = detail::queue_bound_a(M0t, M1t, m, D);
    return 0.5 * sigma_eps + a + 2.0 * D * D / sigma_eps +
           (2.0 * M1t * D + a * a) / sigma_eps +
           stochastic_lambda_tilde(D, M0t, M1t, m, sigma_eps) +
           8.0 * a * a / sigma_eps * std::log(2.0 * K / delta);
}

// B1: bound on F(output) - F(x_hat)
inline double stochastic_objective_gap_bound(double D, double M0t, double M1t, double m,
                                             double sigma_eps, double K, double delta) {
    const double a = detail::queue_bound_a(M0t, M1t, m, D);
    const double lam = stochastic_lambda(D, M0t, M1t, m, sigma_eps, K, delta);
    return (D * D + M1t * M1t / 4.0 + a * a / 2.0 +
            std::sqrt(std::log(1.0 / delta)) * M0t * lam) /
           std::sqrt(K);
}

// B2: bound on max_i F_i(output)
inline double stochastic_feasibility_gap_bound(double D, double M0t, double M1t,
                                               double m, double sigma_eps, double K,
                                               double delta) {
    const double lam = stochastic_lambda(D, M0t, M1t, m, sigma_eps, K, delta);
    return (lam + M1t * M1t + lam * std::sqrt(m) * M1t * M1t / 2.0) / std::sqrt(K);
}

struct TheoreticalK {
    long long K;
    double B1;
    double B2;
};

// Smallest power-of-two K with max(B1, B2) <= eps_hat^2. Diagnostic only: the
// constants make this astronomically conservative next to the K = 1/eps_hat^2
// convention used in practice.
inline TheoreticalK theoretical_K(double D, double M0t, double M1t, double m,
                                  double sigma_eps, double eps_hat, double delta) {
    if (!(sigma_eps > 0.0))
        throw std::invalid_argument("theoretical_K: sigma_eps must be positive");
    if (!(eps_hat > 0.0))
        throw std::invalid_argument("theoretical_K: eps_hat must be positive");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("theoretical_K: delta must lie in (0,1)");
    const double target = eps_hat * eps_hat;
    for (int j = 0; j <= 60; ++j) {
        const long long K = 1LL << j;
        const double Kd = static_cast<double>(K);
        const double b1 = stochastic_objective_gap_bound(D, M0t, M1t, m, sigma_eps, Kd, delta);
        const double b2 = stochastic_feasibility_gap_bound(D, M0t, M1t, m, sigma_eps, Kd, delta);
        if (std::max(b1, b2) <= target) return {K, b1, b2};
    }
    throw std::overflow_error("theoretical K overflow: constants too large for the "
                              "2^60 search cap");
}

}  // namespace wcopt
