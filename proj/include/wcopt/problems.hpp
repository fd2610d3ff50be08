#pragma once

#include <memory>

#include "wcopt/dataset.hpp"
#include "wcopt/losses.hpp"
#include "wcopt/problem.hpp"

namespace wcopt {

// ---- small analytic benchmark -------------------------------------------
// f(x) = x^T A x / 2 with A = diag(10, -1), g(x) = x^T B x / 2 - 10 with
// B = diag(50, -5), over the unit l1 ball. rho = 5, M = 50 (attained by B at
// the ball vertices), D = 2, f_lb = -0.5 at (0, +-1). The uniform Slater
// constants are sigma_eps = 2.5 - 2 rho_eps for any rho_eps in (0, 1.25).
inline ConstrainedProblem build_simple_example(double rho_eps = 1.0) {
    if (!(rho_eps > 0.0 && rho_eps < 1.25))
        throw std::invalid_argument("build_simple_example: rho_eps must lie in (0, 1.25)");

    static constexpr double a1 = 10.0, a2 = -1.0;
    static constexpr double b1 = 50.0, b2 = -5.0;

    ConstrainedProblem p;
    p.name = "simple_example";
    p.domain = L1Ball{1.0};
    p.dim = 2;
    p.rho = 5.0;
    p.M = 50.0;
    p.f_lb = -0.5;
    p.slater = SlaterConstants{2.5 - 2.0 * rho_eps, rho_eps};

    p.objective.value = [](const Vector& x) {
        return 0.5 * (a1 * x[0] * x[0] + a2 * x[1] * x[1]);
    };
    p.objective.subgrad = [](const Vector& x, Vector& g) {
        g.assign(2, 0.0);
        g[0] = a1 * x[0];
        g[1] = a2 * x[1];
    };
    p.objective.weak_convexity_modulus = 1.0;
    p.objective.subgradient_bound = 10.0;

    FunctionOracle con;
    con.value = [](const Vector& x) {
        return 0.5 * (b1 * x[0] * x[0] + b2 * x[1] * x[1]) - 10.0;
    };
    con.subgrad = [](const Vector& x, Vector& g) {
        g.assign(2, 0.0);
        g[0] = b1 * x[0];
        g[1] = b2 * x[1];
    };
    con.weak_convexity_modulus = 5.0;
    con.subgradient_bound = 50.0;
    p.constraints.push_back(std::move(con));

    // Finite-sum view over the two coordinates: drawing coordinate j and
    // scaling by 2 gives unbiased value and gradient estimates.
    StochasticOracle so;
    so.sample = [](const Vector& x, Rng& rng) {
        const std::size_t j = rng.uniform_index(2);
        const double cj = j == 0 ? a1 : a2;
        StochasticSample s;
        s.theta = cj * x[j] * x[j];
        s.zeta.assign(2, 0.0);
        s.zeta[j] = 2.0 * cj * x[j];
        return s;
    };
    so.value_bound = 10.0;
    so.gradient_bound = 20.0;
    so.dataset_size = 2;
    p.objective_stochastic = std::move(so);

    StochasticOracle sc;
    sc.sample = [](const Vector& x, Rng& rng) {
        const std::size_t j = rng.uniform_index(2);
        const double cj = j == 0 ? b1 : b2;
        StochasticSample s;
        s.theta = cj * x[j] * x[j] - 10.0;
        s.zeta.assign(2, 0.0);
        s.zeta[j] = 2.0 * cj * x[j];
        return s;
    };
    sc.value_bound = 40.0;
    sc.gradient_bound = 100.0;
    sc.dataset_size = 2;
    p.constraint_stochastic.push_back(std::move(sc));

    return p;
}

// ---- fairness-constrained classification --------------------------------

struct FairnessSpec {
    double alpha = 2.0;       // loss truncation
    double c = 0.2;           // fairness parameter in (0, 1)
    double l1_radius = 20.0;
    std::optional<double> rho_override;
};

// min mean truncated logistic loss over the labeled set, subject to
//   c * sum_{a in S} sigma(a^T x) - sum_{a in S_min} sigma(a^T x) <= 0
// over the l1 ball. Stochastic oracles draw one row per sample.
inline ConstrainedProblem build_fairness_problem(Dataset train, Dataset unlabeled,
                                                 const FairnessSpec& spec) {
    if (!(spec.alpha > 0.0))
        throw std::invalid_argument("build_fairness_problem: alpha must be positive");
    if (!(spec.c > 0.0 && spec.c < 1.0))
        throw std::invalid_argument("build_fairness_problem: c must lie in (0, 1)");
    if (!train.labels || train.labels->size() != train.rows)
        throw std::invalid_argument("build_fairness_problem: train set needs labels");
    if (!unlabeled.group_mask || unlabeled.group_mask->size() != unlabeled.rows)
        throw std::invalid_argument(
            "build_fairness_problem: unlabeled set needs a group mask");
    if (train.rows == 0 || unlabeled.rows == 0)
        throw std::invalid_argument("build_fairness_problem: empty dataset");

    const std::size_t d = std::max(train.cols, unlabeled.cols);
    const double alpha = spec.alpha;
    const double c = spec.c;

    auto tr = std::make_shared<Dataset>(std::move(train));
    auto un = std::make_shared<Dataset>(std::move(unlabeled));
    tr->pad_columns(d);
    un->pad_columns(d);

    const double max_sq = std::max(tr->max_row_sq_norm(), un->max_row_sq_norm());
    const double max_norm = std::sqrt(max_sq);

    ConstrainedProblem p;
    p.name = "fairness";
    p.domain = L1Ball{spec.l1_radius};
    p.dim = d;
    p.f_lb = 0.0;  // the truncated loss is non-negative

    const double n_train = static_cast<double>(tr->rows);
    p.objective.value = [tr, alpha, n_train](const Vector& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < tr->rows; ++i)
            s += truncated_logistic_margin_value((*tr->labels)[i] * tr->row_dot(i, x),
                                                 alpha);
        return s / n_train;
    };
    p.objective.subgrad = [tr, alpha, n_train](const Vector& x, Vector& g) {
        g.assign(x.size(), 0.0);
        for (std::size_t i = 0; i < tr->rows; ++i) {
            const double b = (*tr->labels)[i];
            const double coef =
                b * truncated_logistic_margin_grad(b * tr->row_dot(i, x), alpha);
            tr->row_axpy(i, coef / n_train, g);
        }
    };
    p.objective.weak_convexity_modulus = max_sq / alpha;
    p.objective.subgradient_bound = max_norm;
    p.objective.dataset_size = tr->rows;

    // per-row weight c - 1{minority}; the constraint is the weighted sum of
    // predicted positive-class probabilities
    double weight_mass = 0.0;        // sum_j |w_j| * ||a_j||^2, for the modulus
    double grad_mass = 0.0;          // sum_j |w_j| * ||a_j||, for the subgradient bound
    for (std::size_t j = 0; j < un->rows; ++j) {
        const double w = std::fabs(c - ((*un->group_mask)[j] ? 1.0 : 0.0));
        weight_mass += w * un->row_sq_norm(j);
        grad_mass += w * std::sqrt(un->row_sq_norm(j));
    }
    constexpr double sigma_curv = 0.09622504486493764;  // max |sigma''| = 1/(6 sqrt 3)

    FunctionOracle con;
    con.value = [un, c](const Vector& x) {
        double s = 0.0;
        for (std::size_t j = 0; j < un->rows; ++j) {
            const double w = c - ((*un->group_mask)[j] ? 1.0 : 0.0);
            s += w * sigmoid(un->row_dot(j, x));
        }
        return s;
    };
    con.subgrad = [un, c](const Vector& x, Vector& g) {
        g.assign(x.size(), 0.0);
        for (std::size_t j = 0; j < un->rows; ++j) {
            const double w = c - ((*un->group_mask)[j] ? 1.0 : 0.0);
            un->row_axpy(j, w * sigmoid_grad(un->row_dot(j, x)), g);
        }
    };
    con.weak_convexity_modulus = sigma_curv * weight_mass;
    con.subgradient_bound = 0.25 * grad_mass;
    con.dataset_size = un->rows;
    p.constraints.push_back(std::move(con));

    p.rho = spec.rho_override
                ? *spec.rho_override
                : std::max(p.objective.weak_convexity_modulus,
                           p.constraints[0].weak_convexity_modulus);
    if (spec.rho_override) {
        p.objective.weak_convexity_modulus =
            std::min(p.objective.weak_convexity_modulus, p.rho);
        p.constraints[0].weak_convexity_modulus =
            std::min(p.constraints[0].weak_convexity_modulus, p.rho);
    }
    p.M = std::max(p.objective.subgradient_bound, p.constraints[0].subgradient_bound);
    p.validation_notes.push_back(
        "rho is a curvature-bound estimate (loss-curvature constant times data norms), "
        "not a verified modulus; override it when tuning");

    // one uniformly random row per draw
    const double max_margin = max_norm * spec.l1_radius;
    StochasticOracle so;
    so.sample = [tr, alpha](const Vector& x, Rng& rng) {
        const std::size_t i = rng.uniform_index(tr->rows);
        const double b = (*tr->labels)[i];
        const double margin = b * tr->row_dot(i, x);
        StochasticSample s;
        s.theta = truncated_logistic_margin_value(margin, alpha);
        s.zeta.assign(x.size(), 0.0);
        tr->row_axpy(i, b * truncated_logistic_margin_grad(margin, alpha), s.zeta);
        return s;
    };
    so.value_bound = alpha * std::log1p(log1pexp(max_margin) / alpha);
    so.gradient_bound = max_norm;
    so.dataset_size = tr->rows;
    p.objective_stochastic = std::move(so);

    const double n_unlab = static_cast<double>(un->rows);
    StochasticOracle sc;
    sc.sample = [un, c, n_unlab](const Vector& x, Rng& rng) {
        const std::size_t j = rng.uniform_index(un->rows);
        const double w = c - ((*un->group_mask)[j] ? 1.0 : 0.0);
        const double t = un->row_dot(j, x);
        StochasticSample s;
        s.theta = n_unlab * w * sigmoid(t);
        s.zeta.assign(x.size(), 0.0);
        un->row_axpy(j, n_unlab * w * sigmoid_grad(t), s.zeta);
        return s;
    };
    sc.value_bound = n_unlab * std::max(c, 1.0 - c);
    sc.gradient_bound = n_unlab * std::max(c, 1.0 - c) * 0.25 * max_norm;
    sc.dataset_size = un->rows;
    p.constraint_stochastic.push_back(std::move(sc));

    return p;
}

// ---- multi-class Neyman-Pearson ------------------------------------------

struct NeymanPearsonSpec {
    std::vector<double> loss_caps;  // r_k for classes 2..K (size K-1)
    double l2_radius = 10.0;        // per-class weight bound
    double alpha = 2.0;             // truncated logistic parameter
};

namespace detail {

inline double block_row_dot(const Dataset& ds, std::size_t i, const Vector& x,
                            std::size_t block, std::size_t d) {
    double s = 0.0;
    const std::size_t off = block * d;
    for (std::size_t k = ds.row_ptr[i]; k < ds.row_ptr[i + 1]; ++k)
        s += ds.values[k] * x[off + ds.col_idx[k]];
    return s;
}

inline void block_row_axpy(const Dataset& ds, std::size_t i, double coef,
                           std::size_t block, std::size_t d, Vector& out) {
    const std::size_t off = block * d;
    for (std::size_t k = ds.row_ptr[i]; k < ds.row_ptr[i + 1]; ++k)
        out[off + ds.col_idx[k]] += coef * ds.values[k];
}

}  // namespace detail

// Decision variable: concatenation of K class weight vectors, each inside its
// own l2 ball. Class 1's summed margin loss is minimized; each class k >= 2
// contributes the constraint  sum_{l != k} mean phi(x_k^T xi - x_l^T xi) <= r_k,
// with phi the truncated logistic loss applied to the margin.
inline ConstrainedProblem build_neyman_pearson(std::vector<Dataset> class_data,
                                               const NeymanPearsonSpec& spec) {
    const std::size_t K = class_data.size();
    if (K < 2) throw std::invalid_argument("build_neyman_pearson: need >= 2 classes");
    if (spec.loss_caps.size() != K - 1)
        throw std::invalid_argument("build_neyman_pearson: need K-1 loss caps");
    for (double r : spec.loss_caps)
        if (!(r > 0.0))
            throw std::invalid_argument("build_neyman_pearson: loss caps must be positive");

    std::size_t d = 0;
    for (auto& ds : class_data) {
        if (ds.rows == 0)
            throw std::invalid_argument("build_neyman_pearson: empty class dataset");
        d = std::max(d, ds.cols);
    }
    auto data = std::make_shared<std::vector<Dataset>>(std::move(class_data));
    for (auto& ds : *data) ds.pad_columns(d);

    double max_sq = 0.0;
    for (const auto& ds : *data) max_sq = std::max(max_sq, ds.max_row_sq_norm());
    const double max_norm = std::sqrt(max_sq);
    const double alpha = spec.alpha;
    const double Kd = static_cast<double>(K);

    ConstrainedProblem p;
    p.name = "neyman_pearson";
    p.domain = BlockL2Balls{spec.l2_radius, K, d};
    p.dim = K * d;
    p.f_lb = 0.0;

    // summed margin loss for class `k` against all other classes
    auto class_loss = [data, d, K, alpha](const Vector& x, std::size_t k) {
        const Dataset& ds = (*data)[k];
        double s = 0.0;
        std::vector<double> t(K);
        for (std::size_t i = 0; i < ds.rows; ++i) {
            for (std::size_t b = 0; b < K; ++b)
                t[b] = detail::block_row_dot(ds, i, x, b, d);
            for (std::size_t l = 0; l < K; ++l)
                if (l != k) s += truncated_logistic_margin_value(t[k] - t[l], alpha);
        }
        return s / static_cast<double>(ds.rows);
    };
    auto class_loss_grad = [data, d, K, alpha](const Vector& x, std::size_t k,
                                               Vector& g) {
        const Dataset& ds = (*data)[k];
        g.assign(x.size(), 0.0);
        std::vector<double> t(K);
        const double inv_n = 1.0 / static_cast<double>(ds.rows);
        for (std::size_t i = 0; i < ds.rows; ++i) {
            for (std::size_t b = 0; b < K; ++b)
                t[b] = detail::block_row_dot(ds, i, x, b, d);
            for (std::size_t l = 0; l < K; ++l) {
                if (l == k) continue;
                const double coef =
                    inv_n * truncated_logistic_margin_grad(t[k] - t[l], alpha);
                detail::block_row_axpy(ds, i, coef, k, d, g);
                detail::block_row_axpy(ds, i, -coef, l, d, g);
            }
        }
    };

    const double per_class_modulus = (Kd - 1.0) * 2.0 * max_sq / alpha;
    const double per_class_grad_bound = (Kd - 1.0) * std::sqrt(2.0) * max_norm;
    const double max_margin = 2.0 * spec.l2_radius * max_norm;
    const double phi_cap = alpha * std::log1p(log1pexp(max_margin) / alpha);

    p.objective.value = [class_loss](const Vector& x) { return class_loss(x, 0); };
    p.objective.subgrad = [class_loss_grad](const Vector& x, Vector& g) {
        class_loss_grad(x, 0, g);
    };
    p.objective.weak_convexity_modulus = per_class_modulus;
    p.objective.subgradient_bound = per_class_grad_bound;
    p.objective.dataset_size = (*data)[0].rows;

    for (std::size_t k = 1; k < K; ++k) {
        const double r_k = spec.loss_caps[k - 1];
        FunctionOracle con;
        con.value = [class_loss, k, r_k](const Vector& x) {
            return class_loss(x, k) - r_k;
        };
        con.subgrad = [class_loss_grad, k](const Vector& x, Vector& g) {
            class_loss_grad(x, k, g);
        };
        con.weak_convexity_modulus = per_class_modulus;
        con.subgradient_bound = per_class_grad_bound;
        con.dataset_size = (*data)[k].rows;
        p.constraints.push_back(std::move(con));

        StochasticOracle sc;
        sc.sample = [data, d, K, alpha, k, r_k](const Vector& x, Rng& rng) {
            const Dataset& ds = (*data)[k];
            const std::size_t i = rng.uniform_index(ds.rows);
            std::vector<double> t(K);
            for (std::size_t b = 0; b < K; ++b)
                t[b] = detail::block_row_dot(ds, i, x, b, d);
            StochasticSample s;
            s.theta = -r_k;
            s.zeta.assign(x.size(), 0.0);
            for (std::size_t l = 0; l < K; ++l) {
                if (l == k) continue;
                s.theta += truncated_logistic_margin_value(t[k] - t[l], alpha);
                const double coef = truncated_logistic_margin_grad(t[k] - t[l], alpha);
                detail::block_row_axpy(ds, i, coef, k, d, s.zeta);
                detail::block_row_axpy(ds, i, -coef, l, d, s.zeta);
            }
            return s;
        };
        sc.value_bound = (Kd - 1.0) * phi_cap + r_k;
        sc.gradient_bound = per_class_grad_bound;
        sc.dataset_size = (*data)[k].rows;
        p.constraint_stochastic.push_back(std::move(sc));
    }

    StochasticOracle so;
    so.sample = [data, d, K, alpha](const Vector& x, Rng& rng) {
        const Dataset& ds = (*data)[0];
        const std::size_t i = rng.uniform_index(ds.rows);
        std::vector<double> t(K);
        for (std::size_t b = 0; b < K; ++b)
            t[b] = detail::block_row_dot(ds, i, x, b, d);
        StochasticSample s;
        s.theta = 0.0;
        s.zeta.assign(x.size(), 0.0);
        for (std::size_t l = 1; l < K; ++l) {
            s.theta += truncated_logistic_margin_value(t[0] - t[l], alpha);
            const double coef = truncated_logistic_margin_grad(t[0] - t[l], alpha);
            detail::block_row_axpy(ds, i, coef, 0, d, s.zeta);
            detail::block_row_axpy(ds, i, -coef, l, d, s.zeta);
        }
        return s;
    };
    so.value_bound = (Kd - 1.0) * phi_cap;
    so.gradient_bound = per_class_grad_bound;
    so.dataset_size = (*data)[0].rows;
    p.objective_stochastic = std::move(so);

    p.rho = per_class_modulus;
    p.M = per_class_grad_bound;
    p.validation_notes.push_back(
        "rho is a curvature-bound estimate from the margin-loss Hessian; override it "
        "when tuning");
    return p;
}

}  // namespace wcopt
