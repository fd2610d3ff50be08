#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wcopt/domain.hpp"
#include "wcopt/rng.hpp"
#include "wcopt/vec.hpp"

namespace wcopt {

// First-order oracle for one weakly convex function: exact value and one
// subgradient at any point of the domain.
struct FunctionOracle {
    std::function<double(const Vector&)> value;
    // writes a subgradient into `out` (resized by the callee)
    std::function<void(const Vector&, Vector&)> subgrad;
    double weak_convexity_modulus = 0.0;
    double subgradient_bound = 0.0;
    // rows swept by one full evaluation; 1 for analytic functions
    std::size_t dataset_size = 1;

    Vector subgradient(const Vector& x) const {
        Vector g;
        subgrad(x, g);
        return g;
    }
};

struct StochasticSample {
    double theta = 0.0;  // unbiased value estimate
    Vector zeta;         // unbiased subgradient estimate
};

// Single-draw stochastic estimator (one data point per sample).
struct StochasticOracle {
    std::function<StochasticSample(const Vector&, Rng&)> sample;
    double value_bound = 0.0;     // |theta| <= value_bound a.s.
    double gradient_bound = 0.0;  // ||zeta|| <= gradient_bound a.s.
    std::size_t dataset_size = 1;
};

struct SlaterConstants {
    double sigma_eps = 0.0;
    double rho_eps = 0.0;
};

// min f0(x) over x in domain, subject to max_i f_i(x) <= 0.
// All f_i are rho-weakly convex with subgradients bounded by M on the domain.
struct ConstrainedProblem {
    FunctionOracle objective;
    std::vector<FunctionOracle> constraints;
    Domain domain;
    std::size_t dim = 0;

    double rho = 0.0;   // max weak-convexity modulus over all f_i
    double M = 0.0;     // max subgradient norm over the domain
    double f_lb = -std::numeric_limits<double>::infinity();
    std::optional<SlaterConstants> slater;

    std::optional<StochasticOracle> objective_stochastic;
    std::vector<StochasticOracle> constraint_stochastic;  // empty or size m

    std::string name;
    // caveats about derived constants, surfaced by validate_problem
    std::vector<std::string> validation_notes;

    std::size_t num_constraints() const { return constraints.size(); }

    bool has_stochastic() const {
        return objective_stochastic.has_value() &&
               constraint_stochastic.size() == constraints.size();
    }

    // joint bound on ||(theta_1..theta_m)|| implied by the per-constraint bounds
    double stochastic_value_bound() const {
        double s = 0.0;
        for (const auto& o : constraint_stochastic) s += o.value_bound * o.value_bound;
        return std::sqrt(s);
    }

    double stochastic_gradient_bound() const {
        double m1 = objective_stochastic ? objective_stochastic->gradient_bound : 0.0;
        for (const auto& o : constraint_stochastic) m1 = std::max(m1, o.gradient_bound);
        return m1;
    }
};

struct ConstraintMax {
    double value;
    std::size_t active_index;  // smallest index attaining the max
};

// g(x) = max_i f_i(x). Ties break to the smallest index.
inline ConstraintMax constraint_max(const ConstrainedProblem& p, const Vector& x) {
    if (p.constraints.empty())
        throw std::invalid_argument("constraint_max: unconstrained problem (m = 0)");
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const double v = p.constraints[i].value(x);
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    return {best, arg};
}

// A subgradient of g = max_i f_i: any subgradient of an active component.
inline void constraint_max_subgrad(const ConstrainedProblem& p, const Vector& x,
                                   Vector& out) {
    const auto active = constraint_max(p, x);
    p.constraints[active.active_index].subgrad(x, out);
}

inline Vector constraint_max_subgradient(const ConstrainedProblem& p, const Vector& x) {
    Vector g;
    constraint_max_subgrad(p, x, g);
    return g;
}

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> notes;
    std::size_t samples_checked = 0;

    bool ok() const { return violations.empty(); }
};

namespace detail {

inline void check_weak_convexity(const FunctionOracle& f, const char* tag,
                                 const Vector& x, const Vector& y, double problem_rho,
                                 ValidationReport& rep) {
    const double fx = f.value(x), fy = f.value(y);
    Vector g;
    f.subgrad(y, g);
    Vector diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];
    const double rho = std::min(f.weak_convexity_modulus, problem_rho);
    const double slack =
        fx - fy - dot(g, diff) + 0.5 * rho * norm2_sq(diff);
    const double tol = 1e-8 * (1.0 + std::fabs(fx) + std::fabs(fy));
    if (slack < -tol) {
        rep.violations.push_back(std::string(tag) +
                                 ": weak-convexity inequality violated by " +
                                 std::to_string(-slack));
    }
}

inline void check_subgrad_bound(const FunctionOracle& f, const char* tag,
                                const Vector& x, double problem_M,
                                ValidationReport& rep) {
    Vector g;
    f.subgrad(x, g);
    const double n = norm2(g);
    const double tol = 1e-9 * (1.0 + n);
    if (n > f.subgradient_bound + tol) {
        rep.violations.push_back(std::string(tag) + ": subgradient norm " +
                                 std::to_string(n) + " exceeds declared bound " +
                                 std::to_string(f.subgradient_bound));
    }
    if (n > problem_M + tol) {
        rep.violations.push_back(std::string(tag) + ": subgradient norm " +
                                 std::to_string(n) + " exceeds problem M " +
                                 std::to_string(problem_M));
    }
}

}  // namespace detail

// Spot-checks the declared constants on sampled points: subgradient bounds,
// weak-convexity lower bounds on point pairs, and stochastic estimator bounds.
// Violations are report contents, never exceptions.
inline ValidationReport validate_problem(const ConstrainedProblem& p,
                                         std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("validate_problem: n_samples >= 1");
    ValidationReport rep;
    rep.notes = p.validation_notes;
    Rng rng(seed);

    if (p.rho < p.objective.weak_convexity_modulus)
        rep.violations.push_back("problem rho below objective modulus");
    for (std::size_t i = 0; i < p.constraints.size(); ++i)
        if (p.rho < p.constraints[i].weak_convexity_modulus)
            rep.violations.push_back("problem rho below constraint " + std::to_string(i) +
                                     " modulus");
    if (p.M < p.objective.subgradient_bound)
        rep.violations.push_back("problem M below objective subgradient bound");
    if (p.slater && (p.slater->sigma_eps <= 0.0 || p.slater->rho_eps <= 0.0))
        rep.violations.push_back("Slater constants must be positive");

    const std::size_t cap = 64;  // stop flooding the report
    for (std::size_t s = 0; s < n_samples && rep.violations.size() < cap; ++s) {
        const Vector x = random_point(p.domain, p.dim, rng);
        const Vector y = random_point(p.domain, p.dim, rng);

        detail::check_subgrad_bound(p.objective, "objective", x, p.M, rep);
        detail::check_weak_convexity(p.objective, "objective", x, y, p.rho, rep);
        for (std::size_t i = 0; i < p.constraints.size(); ++i) {
            const std::string tag = "constraint " + std::to_string(i);
            detail::check_subgrad_bound(p.constraints[i], tag.c_str(), x, p.M, rep);
            detail::check_weak_convexity(p.constraints[i], tag.c_str(), x, y, p.rho, rep);
        }

        if (p.has_stochastic()) {
            const auto s0 = p.objective_stochastic->sample(x, rng);
            if (std::fabs(s0.theta) > p.objective_stochastic->value_bound + 1e-9)
                rep.violations.push_back("objective stochastic value bound violated");
            if (norm2(s0.zeta) > p.objective_stochastic->gradient_bound + 1e-9)
                rep.violations.push_back("objective stochastic gradient bound violated");
            double joint = 0.0;
            for (std::size_t i = 0; i < p.constraint_stochastic.size(); ++i) {
                const auto si = p.constraint_stochastic[i].sample(x, rng);
                joint += si.theta * si.theta;
                if (std::fabs(si.theta) > p.constraint_stochastic[i].value_bound + 1e-9)
                    rep.violations.push_back("constraint " + std::to_string(i) +
                                             " stochastic value bound violated");
                if (norm2(si.zeta) > p.constraint_stochastic[i].gradient_bound + 1e-9)
                    rep.violations.push_back("constraint " + std::to_string(i) +
                                             " stochastic gradient bound violated");
            }
            if (std::sqrt(joint) > p.stochastic_value_bound() + 1e-9)
                rep.violations.push_back("joint stochastic value bound violated");
        }
        ++rep.samples_checked;
    }
    return rep;
}

}  // namespace wcopt
