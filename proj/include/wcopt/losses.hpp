#pragma once

#include <cmath>

#include "wcopt/vec.hpp"

namespace wcopt {

// log(1 + e^s) without overflow at either tail
inline double log1pexp(double s) {
    if (s > 0.0) return s + std::log1p(std::exp(-s));
    return std::log1p(std::exp(s));
}

inline double sigmoid(double s) {
    if (s >= 0.0) {
        const double e = std::exp(-s);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(s);
    return e / (1.0 + e);
}

// d/ds sigmoid(s) = sigmoid(s) (1 - sigmoid(s))
inline double sigmoid_grad(double s) {
    const double v = sigmoid(s);
    return v * (1.0 - v);
}

// Truncated logistic loss as a function of the margin s = b a^T x:
//   phi_alpha(l(s)) with l(s) = log(1 + e^{-s}), phi_alpha(u) = alpha log(1 + u/alpha).
// Bounded, non-negative, non-increasing in the margin, weakly convex.
inline double truncated_logistic_margin_value(double margin, double alpha) {
    return alpha * std::log1p(log1pexp(-margin) / alpha);
}

// derivative with respect to the margin (chain rule through phi and l)
inline double truncated_logistic_margin_grad(double margin, double alpha) {
    const double l = log1pexp(-margin);
    const double phi_prime = 1.0 / (1.0 + l / alpha);
    return phi_prime * (-sigmoid(-margin));
}

inline double truncated_logistic_value(const Vector& x, const Vector& a, double b,
                                       double alpha) {
    return truncated_logistic_margin_value(b * dot(a, x), alpha);
}

inline void truncated_logistic_subgrad(const Vector& x, const Vector& a, double b,
                                       double alpha, Vector& out) {
    const double coef = b * truncated_logistic_margin_grad(b * dot(a, x), alpha);
    out.assign(x.size(), 0.0);
    axpy(coef, a, out);
}

inline Vector truncated_logistic_subgradient(const Vector& x, const Vector& a, double b,
                                             double alpha) {
    Vector g;
    truncated_logistic_subgrad(x, a, b, alpha, g);
    return g;
}

}  // namespace wcopt
