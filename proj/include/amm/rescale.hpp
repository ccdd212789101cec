//
// rescale.hpp - the three reweighting rules for a chosen column subset:
// optimal (normal-equation solve against the product kernel), power
// (inverse root of k times the column/row power), and the flat n/k rule.
//

#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "amm/decomp.hpp"
#include "amm/errors.hpp"
#include "amm/kernel.hpp"
#include "amm/matrix.hpp"

namespace amm {

enum class RescaleRule { optimal, power, n_over_k };

inline const char* rescale_tag(RescaleRule r) {
    switch (r) {
        case RescaleRule::optimal: return "optimal";
        case RescaleRule::power: return "power";
        case RescaleRule::n_over_k: return "n_over_k";
    }
    return "optimal";
}

struct WeightedApproximant {
    Subset subset;
    std::vector<double> weights;  // aligned with subset.indices
    RescaleRule rescale_rule = RescaleRule::optimal;
    bool pseudo_inverse = false;  // optimal solve fell back to eigenvalue clipping
};

namespace detail {

// Shared solve step: weights from Q_J·w = r, falling back to the clipped
// pseudo-inverse when the principal block is singular.
inline WeightedApproximant optimal_from_blocks(Subset j, const Matrix& q_j,
                                               const std::vector<double>& r) {
    WeightedApproximant out;
    out.subset = std::move(j);
    out.rescale_rule = RescaleRule::optimal;
    try {
        out.weights = solve_spd(q_j, r);
    } catch (const SingularSystemError&) {
        out.pseudo_inverse = true;
        const Matrix p = pseudo_inverse_spsd(q_j);
        const std::size_t k = r.size();
        out.weights.assign(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) s += p(i, t) * r[t];
            out.weights[i] = s;
        }
    }
    return out;
}

inline WeightedApproximant unit_weights(Subset j) {
    WeightedApproximant out;
    const std::size_t k = j.k();
    out.subset = std::move(j);
    out.weights.assign(k, 1.0);
    out.rescale_rule = RescaleRule::optimal;
    return out;
}

}  // namespace detail

// Optimal weights w = Q_J⁻¹r with r the row sums of [Q_J Y], i.e. the full
// kernel row sums over J. A full subset short-circuits to unit weights: the
// expansion is then exact term by term.
inline WeightedApproximant optimal_weights(const ProductKernel& kernel, const Subset& j) {
    validate_subset(j, kernel.n);
    const std::size_t k = j.k();
    if (k == kernel.n) return detail::unit_weights(j);

    std::vector<double> r(k, 0.0);
    for (std::size_t t = 0; t < k; ++t) {
        const std::size_t row = j.indices[t];
        double s = 0.0;
        for (std::size_t c = 0; c < kernel.n; ++c) s += kernel.q(row, c);
        r[t] = s;
    }
    return detail::optimal_from_blocks(j, detail::principal_submatrix(kernel.q, j.indices), r);
}

// Same weights computed straight from A and B: only the k rows of the kernel
// are ever formed (a k×n strip), so no n×n matrix is materialized. This is
// the path the greedy pipeline uses.
inline WeightedApproximant optimal_weights(const Matrix& a, const Matrix& b, const Subset& j) {
    if (a.cols() != b.rows()) throw ShapeError("inner dimensions do not match");
    const std::size_t n = a.cols();
    validate_subset(j, n);
    const std::size_t k = j.k();
    if (k == n) return detail::unit_weights(j);

    Matrix strip(k, n);  // rows J of the kernel
    for (std::size_t t = 0; t < k; ++t) {
        const std::size_t i = j.indices[t];
        for (std::size_t c = 0; c < n; ++c)
            strip(t, c) = column_dot(a, i, c) * row_dot(b, i, c);
    }
    std::vector<double> r(k, 0.0);
    Matrix q_j(k, k);
    for (std::size_t t = 0; t < k; ++t) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) s += strip(t, c);
        r[t] = s;
        for (std::size_t u = 0; u < k; ++u) q_j(t, u) = strip(t, j.indices[u]);
    }
    return detail::optimal_from_blocks(j, q_j, r);
}

// w_i = 1/sqrt(k·||A_i||²·||B^i||²).
inline WeightedApproximant power_weights(const Matrix& a, const Matrix& b, const Subset& j) {
    if (a.cols() != b.rows()) throw ShapeError("inner dimensions do not match");
    validate_subset(j, a.cols());
    const std::size_t k = j.k();
    if (k == 0) throw CardinalityError("power weights need a nonempty subset");

    WeightedApproximant out;
    out.subset = j;
    out.rescale_rule = RescaleRule::power;
    out.weights.resize(k);
    for (std::size_t t = 0; t < k; ++t) {
        const std::size_t i = j.indices[t];
        const double power = column_dot(a, i, i) * row_dot(b, i, i);
        if (power <= 0.0)
            throw DegenerateWeightsError("selected column/row pair has zero power");
        out.weights[t] = 1.0 / std::sqrt(static_cast<double>(k) * power);
    }
    return out;
}

// All weights n/k.
inline WeightedApproximant n_over_k_weights(std::size_t n, const Subset& j) {
    validate_subset(j, n);
    const std::size_t k = j.k();
    if (k == 0) throw CardinalityError("rescaling needs a nonempty subset");
    WeightedApproximant out;
    out.subset = j;
    out.rescale_rule = RescaleRule::n_over_k;
    out.weights.assign(k, static_cast<double>(n) / static_cast<double>(k));
    return out;
}

// Σ_{i∈J} w_i·A_i·B^i, evaluated as (A_J·diag(w))·B_J: an m×k by k×p product,
// never n separate rank-one terms.
inline Matrix apply(const Matrix& a, const Matrix& b, const WeightedApproximant& approx) {
    if (a.cols() != b.rows()) throw ShapeError("inner dimensions do not match");
    validate_subset(approx.subset, a.cols());
    const std::size_t k = approx.subset.k();
    if (approx.weights.size() != k) throw ShapeError("weights/subset length mismatch");

    Matrix a_scaled(a.rows(), k);
    Matrix b_rows(k, b.cols());
    for (std::size_t t = 0; t < k; ++t) {
        const std::size_t i = approx.subset.indices[t];
        const double w = approx.weights[t];
        for (std::size_t r = 0; r < a.rows(); ++r) a_scaled(r, t) = w * a(r, i);
        for (std::size_t c = 0; c < b.cols(); ++c) b_rows(t, c) = b(i, c);
    }
    return matmul(a_scaled, b_rows);
}

}  // namespace amm
