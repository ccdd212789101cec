//
// approx.hpp - end-to-end approximate products: pick a column subset, weight
// it, apply it, and measure the error. Also the Gaussian-sketch baseline and
// the closed-form error bounds used as oracles.
//
// The greedy/uniform/power pipelines work from column and row norms alone and
// never materialize the n×n kernel; the determinant-based selectors need it.
//

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "amm/decomp.hpp"
#include "amm/errors.hpp"
#include "amm/kernel.hpp"
#include "amm/matrix.hpp"
#include "amm/rescale.hpp"
#include "amm/rng.hpp"
#include "amm/select.hpp"

namespace amm {

enum class Selection { uniform, power, determinant_mh, determinant_exact, greedy };

inline const char* selection_tag(Selection s) {
    switch (s) {
        case Selection::uniform: return "uniform";
        case Selection::power: return "power";
        case Selection::determinant_mh: return "det-mh";
        case Selection::determinant_exact: return "det-exact";
        case Selection::greedy: return "greedy";
    }
    return "greedy";
}

inline bool parse_selection(const std::string& tag, Selection& out) {
    if (tag == "uniform") out = Selection::uniform;
    else if (tag == "power") out = Selection::power;
    else if (tag == "det-mh") out = Selection::determinant_mh;
    else if (tag == "det-exact") out = Selection::determinant_exact;
    else if (tag == "greedy") out = Selection::greedy;
    else return false;
    return true;
}

inline const char* rescale_csv_tag(RescaleRule r) {
    switch (r) {
        case RescaleRule::optimal: return "optimal";
        case RescaleRule::power: return "power";
        case RescaleRule::n_over_k: return "n-over-k";
    }
    return "optimal";
}

inline bool parse_rescale(const std::string& tag, RescaleRule& out) {
    if (tag == "optimal") out = RescaleRule::optimal;
    else if (tag == "power") out = RescaleRule::power;
    else if (tag == "n-over-k") out = RescaleRule::n_over_k;
    else return false;
    return true;
}

struct MethodSpec {
    Selection selection = Selection::greedy;
    RescaleRule rescale = RescaleRule::optimal;
    std::size_t k = 1;
};

struct ApproxResult {
    Matrix approximant;
    Subset subset;
    std::vector<double> weights;
    double abs_error_frobenius = 0.0;
    double rel_error_db = 0.0;
    bool pseudo_inverse = false;
};

namespace detail {

inline double db_error(double abs_error, double denom) {
    if (abs_error == 0.0) return -std::numeric_limits<double>::infinity();
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(abs_error / denom);
}

inline std::vector<double> kernel_diag_from_norms(const Matrix& a, const Matrix& b) {
    const std::vector<double> ca = column_squared_norms(a);
    const std::vector<double> rb = row_squared_norms(b);
    std::vector<double> diag(ca.size());
    for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = ca[i] * rb[i];
    return diag;
}

inline void fill_error_fields(const Matrix& a, const Matrix& b, ApproxResult& res) {
    const Matrix exact = matmul(a, b);
    res.abs_error_frobenius = frobenius_norm(subtract(exact, res.approximant));
    res.rel_error_db =
        db_error(res.abs_error_frobenius, frobenius_norm(a) * frobenius_norm(b));
}

}  // namespace detail

// 20·log10(||AB - approximant||_F / (||A||_F·||B||_F)); -inf at zero error.
inline double relative_error_db(const Matrix& a, const Matrix& b, const Matrix& approximant) {
    const Matrix exact = matmul(a, b);
    if (exact.rows() != approximant.rows() || exact.cols() != approximant.cols())
        throw ShapeError("approximant shape does not match the product");
    const double abs_error = frobenius_norm(subtract(exact, approximant));
    return detail::db_error(abs_error, frobenius_norm(a) * frobenius_norm(b));
}

inline ApproxResult approximate_product(const Matrix& a, const Matrix& b, const MethodSpec& spec,
                                        RngStream& rng, const MHConfig& mh = {}) {
    if (a.cols() != b.rows()) throw ShapeError("inner dimensions do not match");
    const std::size_t n = a.cols();
    detail::check_cardinality(spec.k, n);

    Subset subset;
    switch (spec.selection) {
        case Selection::greedy:
            subset = Subset{detail::greedy_indices(detail::kernel_diag_from_norms(a, b), spec.k),
                            Provenance::greedy};
            break;
        case Selection::uniform:
            subset = Subset{detail::uniform_draw(n, spec.k, rng), Provenance::uniform};
            break;
        case Selection::power:
            subset = Subset{detail::power_draw(detail::kernel_diag_from_norms(a, b), spec.k, rng),
                            Provenance::power};
            break;
        case Selection::determinant_exact: {
            const ProductKernel kern = build_kernel(a, b);
            subset = select_determinant_exact(SelectionContext{kern, spec.k, rng});
            break;
        }
        case Selection::determinant_mh: {
            const ProductKernel kern = build_kernel(a, b);
            subset = select_determinant_mh(SelectionContext{kern, spec.k, rng}, mh);
            break;
        }
    }

    WeightedApproximant wa;
    switch (spec.rescale) {
        case RescaleRule::optimal: wa = optimal_weights(a, b, subset); break;
        case RescaleRule::power: wa = power_weights(a, b, subset); break;
        case RescaleRule::n_over_k: wa = n_over_k_weights(n, subset); break;
    }

    ApproxResult res;
    res.approximant = apply(a, b, wa);
    if (!res.approximant.all_finite())
        throw NumericError("approximant has non-finite entries");
    res.subset = std::move(wa.subset);
    res.weights = std::move(wa.weights);
    res.pseudo_inverse = wa.pseudo_inverse;
    detail::fill_error_fields(a, b, res);
    return res;
}

// Gaussian-sketch baseline k⁻¹·A·Wᵀ·W·B with W a k×n matrix of independent
// standard normals, filled in row-major order from the stream.
inline ApproxResult jl_approximate(const Matrix& a, const Matrix& b, std::size_t k,
                                   RngStream& rng) {
    if (a.cols() != b.rows()) throw ShapeError("inner dimensions do not match");
    if (k < 1) throw CardinalityError("sketch size must be at least 1");
    const std::size_t n = a.cols();

    Matrix w(k, n);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j) w(i, j) = rng.normal();

    ApproxResult res;
    res.approximant = scale(matmul(matmul(a, transpose(w)), matmul(w, b)),
                            1.0 / static_cast<double>(k));
    detail::fill_error_fields(a, b, res);
    return res;
}

// (n-k)·tr(S_C(Q_J)): upper bound on the squared error of the optimally
// reweighted subset, tight exactly when the complement is a multiple of the
// all-ones matrix.
inline double bound_trace(const KernelPartition& p) {
    const std::size_t nk = p.z.rows();
    if (nk == 0) return 0.0;
    return static_cast<double>(nk) * trace(schur_complement(p));
}

// sqrt((n-k)(k+1))·sqrt(Σ_{i>k} λ_i(Q)): bound on the expected error under
// determinant-proportional selection, via the spectral tail of Q.
inline double bound_expected_random(const ProductKernel& kernel, std::size_t k) {
    const std::size_t n = kernel.n;
    if (k >= n) return 0.0;
    const Matrix x = cholesky_factor(kernel.q);
    const std::vector<double> sv = svd_values(x);
    double tail = 0.0;
    for (std::size_t i = k; i < sv.size(); ++i) tail += sv[i] * sv[i];
    return std::sqrt(static_cast<double>(n - k) * static_cast<double>(k + 1)) * std::sqrt(tail);
}

// Prefix majorization of the squared spectra: Σ_{i≤m} σ_i²(X) against
// Σ_{i≤m} σ_i²(A)·σ_i²(B) for every prefix length m, where Q = XᵀX.
struct MajorizationReport {
    std::vector<double> lhs_prefix;
    std::vector<double> rhs_prefix;
    std::vector<double> margins;  // rhs - lhs, one per prefix
    bool holds = true;
};

inline MajorizationReport bound_majorization_check(const Matrix& a, const Matrix& b) {
    const ProductKernel kern = build_kernel(a, b);
    const std::size_t n = kern.n;
    const std::vector<double> svx = svd_values(cholesky_factor(kern.q));
    std::vector<double> sva = svd_values(a);
    std::vector<double> svb = svd_values(b);
    sva.resize(n, 0.0);
    svb.resize(n, 0.0);

    MajorizationReport rep;
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        lhs += svx[m] * svx[m];
        rhs += sva[m] * sva[m] * svb[m] * svb[m];
        rep.lhs_prefix.push_back(lhs);
        rep.rhs_prefix.push_back(rhs);
        rep.margins.push_back(rhs - lhs);
        if (rhs - lhs < -1e-9 * std::max(1.0, rhs)) rep.holds = false;
    }
    return rep;
}

// sqrt((n-k)·Σ_{i∉J} ||A_i||²||B^i||²): worst-case error of the optimally
// reweighted subset J, from the arithmetic-geometric mean step.
inline double bound_greedy_worstcase(const Matrix& a, const Matrix& b, const Subset& j) {
    if (a.cols() != b.rows()) throw ShapeError("inner dimensions do not match");
    const std::size_t n = a.cols();
    validate_subset(j, n);
    const std::vector<double> diag = detail::kernel_diag_from_norms(a, b);
    double outside = 0.0;
    for (std::size_t i : detail::complement_indices(n, j)) outside += diag[i];
    return std::sqrt(static_cast<double>(n - j.k()) * outside);
}

// ||X - X_k||² against min(σ₁²(A)·||B||²_F, σ₁²(B)·||A||²_F) - ||X_k||².
struct XResidualReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
};

inline XResidualReport bound_x_residual(const Matrix& a, const Matrix& b, std::size_t k) {
    const ProductKernel kern = build_kernel(a, b);
    const std::vector<double> svx = svd_values(cholesky_factor(kern.q));

    XResidualReport rep;
    double head = 0.0;
    for (std::size_t i = 0; i < svx.size(); ++i) {
        if (i < k) head += svx[i] * svx[i];
        else rep.lhs += svx[i] * svx[i];
    }
    const std::vector<double> sva = svd_values(a);
    const std::vector<double> svb = svd_values(b);
    const double s1a = sva.empty() ? 0.0 : sva.front();
    const double s1b = svb.empty() ? 0.0 : svb.front();
    const double fa = frobenius_norm(a);
    const double fb = frobenius_norm(b);
    rep.rhs = std::min(s1a * s1a * fb * fb, s1b * s1b * fa * fa) - head;
    rep.holds = rep.lhs <= rep.rhs + 1e-9 * std::max(1.0, std::abs(rep.rhs));
    return rep;
}

}  // namespace amm
