//
// decomp.hpp - symmetric eigendecomposition, Cholesky, SPD solves, determinants
//
// Conventions fixed for bit-reproducibility: eigenvalues sorted non-increasing
// (stable over ties), eigenvector columns sign-normalized so the entry of
// largest magnitude is positive.
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "amm/errors.hpp"
#include "amm/matrix.hpp"

namespace amm {

struct SymEigen {
    std::vector<double> eigenvalues;  // non-increasing
    Matrix eigenvectors;              // column i pairs with eigenvalues[i]
};

namespace detail {

inline Matrix symmetrized(const Matrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("expected a square matrix");
    const std::size_t n = m.rows();
    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

inline double offdiag_frobenius(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

// Lower-triangular Cholesky, L·Lᵀ = Q. Returns false on a pivot at or below
// eps_rel times the largest diagonal entry (semi-definite or indefinite input);
// *fail_pivot then holds the offending pivot value.
inline bool try_cholesky_lower(const Matrix& q, Matrix& l, double* fail_pivot,
                               double eps_rel = 1e-12) {
    const std::size_t n = q.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(q(i, i)));
    if (scale == 0.0) scale = 1.0;
    l = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = q(j, j);
        for (std::size_t t = 0; t < j; ++t) d -= l(j, t) * l(j, t);
        if (d <= eps_rel * scale) {
            if (fail_pivot) *fail_pivot = d;
            return false;
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = q(i, j);
            for (std::size_t t = 0; t < j; ++t) s -= l(i, t) * l(j, t);
            l(i, j) = s / ljj;
        }
    }
    return true;
}

// Solve L·Lᵀ·x = b in place given the lower factor.
inline void cholesky_solve_inplace(const Matrix& l, std::vector<double>& b) {
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t t = 0; t < i; ++t) s -= l(i, t) * b[t];
        b[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t t = ii + 1; t < n; ++t) s -= l(t, ii) * b[t];
        b[ii] = s / l(ii, ii);
    }
}

// Solve Q·X = RHS column by column given the lower factor of Q.
inline Matrix cholesky_solve_columns(const Matrix& l, const Matrix& rhs) {
    if (l.rows() != rhs.rows()) throw ShapeError("factor/rhs row mismatch");
    Matrix x(rhs.rows(), rhs.cols());
    std::vector<double> col(rhs.rows());
    for (std::size_t c = 0; c < rhs.cols(); ++c) {
        for (std::size_t i = 0; i < rhs.rows(); ++i) col[i] = rhs(i, c);
        cholesky_solve_inplace(l, col);
        for (std::size_t i = 0; i < rhs.rows(); ++i) x(i, c) = col[i];
    }
    return x;
}

// Determinant of a general square matrix by partial-pivot LU; used for the
// bordered minors of the Schur-complement entry identity.
inline double det_lu(Matrix a) {
    if (a.rows() != a.cols()) throw ShapeError("determinant needs a square matrix");
    const std::size_t n = a.rows();
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        if (a(piv, c) == 0.0) return 0.0;
        if (piv != c) {
            for (std::size_t t = 0; t < n; ++t) std::swap(a(piv, t), a(c, t));
            det = -det;
        }
        det *= a(c, c);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a(r, c) / a(c, c);
            if (f == 0.0) continue;
            for (std::size_t t = c; t < n; ++t) a(r, t) -= f * a(c, t);
        }
    }
    return det;
}

}  // namespace detail

// Cyclic Jacobi on the symmetrized input; converges when the off-diagonal
// Frobenius mass drops below 1e-12 times the input norm.
inline SymEigen sym_eigen(const Matrix& m) {
    Matrix a = detail::symmetrized(m);
    const std::size_t n = a.rows();
    Matrix v = Matrix::identity(n);
    const double tol = 1e-12 * frobenius_norm(a);

    const int max_sweeps = 100;
    int sweep = 0;
    while (detail::offdiag_frobenius(a) > tol) {
        if (++sweep > max_sweeps) throw NumericError("Jacobi eigendecomposition failed to converge");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    SymEigen out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.eigenvalues[c] = a(src, src);
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag = std::abs(v(i, src));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, c) = sign * v(i, src);
    }
    return out;
}

// Returns X with XᵀX = Q. Positive definite inputs take the Cholesky path
// (X = Lᵀ, upper triangular); when the smallest eigenvalue falls below
// 1e-10·λ_max the factor is built from the eigenvalue square root instead,
// clipping small negatives. Eigenvalues below -1e-8·λ_max are rejected.
inline Matrix cholesky_factor(const Matrix& q) {
    const Matrix s = detail::symmetrized(q);
    Matrix l;
    if (detail::try_cholesky_lower(s, l, nullptr, 1e-10)) return transpose(l);

    const SymEigen eig = sym_eigen(s);
    const std::size_t n = s.rows();
    const double lmax = n ? std::max(eig.eigenvalues.front(), 0.0) : 0.0;
    if (n && eig.eigenvalues.back() < -1e-8 * std::max(lmax, 1e-14))
        throw NotPsdError("matrix has a significantly negative eigenvalue");
    // X = diag(sqrt(λ))·Uᵀ, so XᵀX = U·diag(λ)·Uᵀ = Q.
    Matrix x(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double root = std::sqrt(std::max(eig.eigenvalues[i], 0.0));
        for (std::size_t j = 0; j < n; ++j) x(i, j) = root * eig.eigenvectors(j, i);
    }
    return x;
}

// Solves Q·w = rhs for symmetric positive definite Q via Cholesky plus one
// round of iterative refinement. Near-singular pivots are reported, carrying
// the offending pivot magnitude so callers can fall back to a pseudo-inverse.
inline std::vector<double> solve_spd(const Matrix& q, const std::vector<double>& rhs) {
    const Matrix s = detail::symmetrized(q);
    const std::size_t n = s.rows();
    if (rhs.size() != n) throw ShapeError("right-hand side length mismatch");
    Matrix l;
    double pivot = 0.0;
    if (!detail::try_cholesky_lower(s, l, &pivot, 1e-12))
        throw SingularSystemError("positive-definite solve hit a non-positive pivot", pivot);

    std::vector<double> w = rhs;
    detail::cholesky_solve_inplace(l, w);
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = rhs[i];
        for (std::size_t j = 0; j < n; ++j) acc -= s(i, j) * w[j];
        resid[i] = acc;
    }
    detail::cholesky_solve_inplace(l, resid);
    for (std::size_t i = 0; i < n; ++i) w[i] += resid[i];
    return w;
}

// Determinant of an SPSD matrix as the product of squared Cholesky pivots.
// Rank-deficient inputs give 0; a clearly negative pivot is rejected.
inline double det_spd(const Matrix& q) {
    const Matrix s = detail::symmetrized(q);
    const std::size_t n = s.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(s(i, i)));
    if (scale == 0.0) return n == 0 ? 1.0 : 0.0;

    Matrix l(n, n);
    double det = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        double d = s(j, j);
        for (std::size_t t = 0; t < j; ++t) d -= l(j, t) * l(j, t);
        if (d < -1e-8 * scale) throw NotPsdError("determinant requested for a non-PSD matrix");
        if (d <= 1e-12 * scale) return 0.0;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        det *= d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double acc = s(i, j);
            for (std::size_t t = 0; t < j; ++t) acc -= l(i, t) * l(j, t);
            l(i, j) = acc / ljj;
        }
    }
    return det;
}

// Singular values, non-increasing, via the eigenvalues of the smaller Gram matrix.
inline std::vector<double> svd_values(const Matrix& m) {
    const std::size_t k = std::min(m.rows(), m.cols());
    if (k == 0) return {};
    const Matrix g = m.rows() >= m.cols() ? gram(m) : gram_rows(m);
    const SymEigen eig = sym_eigen(g);
    std::vector<double> sv(k);
    for (std::size_t i = 0; i < k; ++i) sv[i] = std::sqrt(std::max(eig.eigenvalues[i], 0.0));
    return sv;
}

namespace detail {

// Moore-Penrose pseudo-inverse of an SPSD matrix by eigenvalue clipping at
// 1e-10·λ_max; sets *clipped when any eigenvalue was dropped.
inline Matrix pseudo_inverse_spsd(const Matrix& q, bool* clipped = nullptr) {
    const SymEigen eig = sym_eigen(q);
    const std::size_t n = q.rows();
    double lmax = 0.0;
    for (double v : eig.eigenvalues) lmax = std::max(lmax, v);
    const double floor = 1e-10 * std::max(lmax, 1e-14);
    bool any_clipped = false;
    std::vector<double> inv(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (eig.eigenvalues[i] > floor) {
            inv[i] = 1.0 / eig.eigenvalues[i];
        } else {
            inv[i] = 0.0;
            any_clipped = true;
        }
    }
    if (clipped) *clipped = any_clipped;
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t)
                s += eig.eigenvectors(i, t) * inv[t] * eig.eigenvectors(j, t);
            p(i, j) = s;
            p(j, i) = s;
        }
    return p;
}

}  // namespace detail

}  // namespace amm
