#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>

#include "wcopt/rng.hpp"
#include "wcopt/vec.hpp"

namespace wcopt {

struct L1Ball {
    double radius;
};

struct L2Ball {
    double radius;
};

struct Box {
    Vector lower;
    Vector upper;
};

// Product of equal-radius l2 balls over contiguous coordinate blocks.
// Used for multi-class problems where each class weight vector is
// constrained independently; the Euclidean projection factors per block.
struct BlockL2Balls {
    double radius;
    std::size_t n_blocks;
    std::size_t block_dim;
};

using Domain = std::variant<L1Ball, L2Ball, Box, BlockL2Balls>;

namespace detail {

// Absolute slack recognizing "already feasible" inputs, so that projecting a
// projected point returns it bit-for-bit while outputs still satisfy the
// domain inequality to within 1e-12.
inline constexpr double kFeasSlack = 1e-12;

inline void project_l2_in_place(double radius, std::span<double> x) {
    const double n = norm2(x);
    if (n <= radius + kFeasSlack) return;
    scale(radius / n, x);
}

// Sort-and-threshold l1 projection (exact, O(d log d)).
inline void project_l1_in_place(double radius, Vector& x) {
    if (norm1(x) <= radius + kFeasSlack) return;
    static thread_local Vector mags;
    mags.assign(x.begin(), x.end());
    for (auto& v : mags) v = std::fabs(v);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    // tau = (sum of the rho largest magnitudes - radius) / rho, where rho is
    // the largest prefix length whose last entry still exceeds the threshold
    double cum = 0.0, tau = 0.0;
    for (std::size_t j = 0; j < mags.size(); ++j) {
        cum += mags[j];
        const double cand = (cum - radius) / static_cast<double>(j + 1);
        if (mags[j] > cand) tau = cand;
    }
    for (auto& v : x) {
        const double m = std::fabs(v) - tau;
        v = m > 0.0 ? (v > 0.0 ? m : -m) : 0.0;
    }
}

}  // namespace detail

inline void project_in_place(const Domain& dom, Vector& x) {
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, L1Ball>) {
                detail::project_l1_in_place(d.radius, x);
            } else if constexpr (std::is_same_v<T, L2Ball>) {
                detail::project_l2_in_place(d.radius, x);
            } else if constexpr (std::is_same_v<T, Box>) {
                for (std::size_t i = 0; i < x.size(); ++i)
                    x[i] = std::clamp(x[i], d.lower[i], d.upper[i]);
            } else {
                for (std::size_t b = 0; b < d.n_blocks; ++b) {
                    std::span<double> blk(x.data() + b * d.block_dim, d.block_dim);
                    detail::project_l2_in_place(d.radius, blk);
                }
            }
        },
        dom);
}

inline Vector project(const Domain& dom, Vector x) {
    project_in_place(dom, x);
    return x;
}

inline double diameter(const Domain& dom) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, L1Ball>) {
                return 2.0 * d.radius;
            } else if constexpr (std::is_same_v<T, L2Ball>) {
                return 2.0 * d.radius;
            } else if constexpr (std::is_same_v<T, Box>) {
                return dist(d.upper, d.lower);
            } else {
                return 2.0 * d.radius * std::sqrt(static_cast<double>(d.n_blocks));
            }
        },
        dom);
}

inline std::size_t dimension(const Domain& dom) {
    return std::visit(
        [](const auto& d) -> std::size_t {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Box>) {
                return d.lower.size();
            } else if constexpr (std::is_same_v<T, BlockL2Balls>) {
                return d.n_blocks * d.block_dim;
            } else {
                return 0;  // balls carry no intrinsic dimension
            }
        },
        dom);
}

inline bool contains(const Domain& dom, std::span<const double> x, double tol = 1e-9) {
    return std::visit(
        [&](const auto& d) -> bool {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, L1Ball>) {
                return norm1(x) <= d.radius + tol;
            } else if constexpr (std::is_same_v<T, L2Ball>) {
                return norm2(x) <= d.radius + tol;
            } else if constexpr (std::is_same_v<T, Box>) {
                for (std::size_t i = 0; i < x.size(); ++i)
                    if (x[i] < d.lower[i] - tol || x[i] > d.upper[i] + tol) return false;
                return true;
            } else {
                for (std::size_t b = 0; b < d.n_blocks; ++b) {
                    std::span<const double> blk(x.data() + b * d.block_dim, d.block_dim);
                    if (norm2(blk) > d.radius + tol) return false;
                }
                return true;
            }
        },
        dom);
}

// Draws a point from the domain (uniform for balls and boxes); used by
// validation spot-checks and property tests.
inline Vector random_point(const Domain& dom, std::size_t dim, Rng& rng) {
    return std::visit(
        [&](const auto& d) -> Vector {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, L1Ball>) {
                // exponential weights give uniform simplex; random signs and
                // radial factor u^(1/d) make the ball uniform
                Vector x(dim);
                double s = 0.0;
                for (auto& v : x) {
                    double u = rng.uniform();
                    while (u <= 0.0) u = rng.uniform();
                    v = -std::log(u);
                    s += v;
                }
                const double r =
                    d.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
                for (auto& v : x) {
                    v *= r / s;
                    if (rng.uniform() < 0.5) v = -v;
                }
                return x;
            } else if constexpr (std::is_same_v<T, L2Ball>) {
                Vector x = rng.normal_vector(dim);
                const double n = std::max(norm2(x), 1e-300);
                const double r =
                    d.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
                scale(r / n, x);
                return x;
            } else if constexpr (std::is_same_v<T, Box>) {
                Vector x(d.lower.size());
                for (std::size_t i = 0; i < x.size(); ++i)
                    x[i] = rng.uniform(d.lower[i], d.upper[i]);
                return x;
            } else {
                Vector x(d.n_blocks * d.block_dim);
                for (std::size_t b = 0; b < d.n_blocks; ++b) {
                    Vector blk = random_point(Domain{L2Ball{d.radius}}, d.block_dim, rng);
                    std::copy(blk.begin(), blk.end(), x.begin() + b * d.block_dim);
                }
                return x;
            }
        },
        dom);
}

}  // namespace wcopt
