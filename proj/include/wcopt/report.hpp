#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "wcopt/vec.hpp"

namespace wcopt {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Work accounting in "data passes": a full deterministic evaluation of f or g
// costs 1.0 pass, a single stochastic draw from a dataset of n rows costs 1/n.
// Value and subgradient taken at the same point in the same step count once.
struct EvalCounts {
    std::size_t full_objective_evals = 0;
    std::size_t full_constraint_evals = 0;
    std::size_t stochastic_samples = 0;
    double data_passes = 0.0;

    void add_objective_eval() {
        ++full_objective_evals;
        data_passes += 1.0;
    }
    void add_constraint_eval() {
        ++full_constraint_evals;
        data_passes += 1.0;
    }
    void add_sample(std::size_t dataset_size) {
        ++stochastic_samples;
        data_passes += 1.0 / static_cast<double>(dataset_size == 0 ? 1 : dataset_size);
    }
    void merge(const EvalCounts& o) {
        full_objective_evals += o.full_objective_evals;
        full_constraint_evals += o.full_constraint_evals;
        stochastic_samples += o.stochastic_samples;
        data_passes += o.data_passes;
    }
};

struct InnerTraceRow {
    std::size_t k;
    Vector z;                 // iterate before the step
    double constraint_value;  // G(z_k)
    bool objective_step;      // true when the iteration stepped along F'
};

// Certified outcome of one subproblem solve, against the eps_hat^2 contract.
struct OracleReport {
    Vector x;  // subproblem output

    double achieved_G = kNaN;          // G(x), exact evaluation
    double fgap_bound = kNaN;          // certified bound on F(x) - F(x_hat)
    double fgap_vs_reference = kNaN;   // F(x) - reference, when a reference is given
    double eps_hat = kNaN;             // accuracy target of this solve

    std::size_t iterations = 0;
    std::size_t objective_steps = 0;    // |I|
    std::size_t constraint_steps = 0;   // |J|

    // queue-method diagnostics (NaN / empty for the deterministic oracle)
    double final_queue_norm = kNaN;
    double max_queue_norm = kNaN;
    double queue_weight_V = kNaN;
    std::vector<double> final_queues;

    EvalCounts evals;
    std::optional<std::vector<InnerTraceRow>> inner_trace;
};

}  // namespace wcopt
