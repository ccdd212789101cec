//
// matrix.hpp - dense real matrix type and the basic operations on it
//
// Row-major storage, value semantics, double entries. Zero-dimension
// matrices are permitted: block bookkeeping (partitions with k == n, the
// empty-subset Schur oracle) needs empty Y/Z blocks.
//

#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "amm/errors.hpp"

namespace amm {

namespace detail {

// Instrumentation for structural tests: records the largest matrix
// allocated and the largest square dimension seen since the last reset.
struct AllocStats {
    static inline std::atomic<std::size_t> max_elems{0};
    static inline std::atomic<std::size_t> max_square_dim{0};

    static void record(std::size_t rows, std::size_t cols) {
        update_max(max_elems, rows * cols);
        if (rows == cols && rows > 0) update_max(max_square_dim, rows);
    }

    static void reset() {
        max_elems.store(0, std::memory_order_relaxed);
        max_square_dim.store(0, std::memory_order_relaxed);
    }

private:
    static void update_max(std::atomic<std::size_t>& slot, std::size_t value) {
        std::size_t cur = slot.load(std::memory_order_relaxed);
        while (cur < value &&
               !slot.compare_exchange_weak(cur, value, std::memory_order_relaxed)) {
        }
    }
};

}  // namespace detail

class Matrix {
public:
    Matrix() = default;

    // rows x cols, zero-filled.
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
        detail::AllocStats::record(rows_, cols_);
    }

    // Entries in row-major order; rejects size mismatch and non-finite input.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw ShapeError("entry count does not match rows x cols");
        require_finite();
        detail::AllocStats::record(rows_, cols_);
    }

    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> entries)
        : Matrix(rows, cols, std::vector<double>(entries)) {}

    // Row-of-rows literal: Matrix{{1, 2}, {3, 4}}.
    Matrix(std::initializer_list<std::initializer_list<double>> rows)
        : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw ShapeError("ragged row in matrix literal");
            data_.insert(data_.end(), r.begin(), r.end());
        }
        require_finite();
        detail::AllocStats::record(rows_, cols_);
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    double* row(std::size_t i) noexcept { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const noexcept { return data_.data() + i * cols_; }

    // Exact (bitwise) equality; used by determinism tests.
    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    bool all_finite() const noexcept {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    void require_finite() const {
        if (!all_finite()) throw NumericError("matrix entry is not finite");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// basic operations
// ---------------------------------------------------------------------------

// Exact dense product; the ground truth for every error measurement.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    const std::size_t n = a.cols(), p = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < p; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

inline double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    const double* d = m.data();
    for (std::size_t i = 0, e = m.rows() * m.cols(); i < e; ++i) s += d[i] * d[i];
    return std::sqrt(s);
}

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

// A^T A, symmetric positive semi-definite by construction: the upper
// triangle is computed once and mirrored so the result is exactly symmetric.
inline Matrix gram(const Matrix& a) {
    const std::size_t n = a.cols();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * a(r, j);
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

// B B^T (Gram matrix of the rows).
inline Matrix gram_rows(const Matrix& b) {
    const std::size_t n = b.rows();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            const double* bi = b.row(i);
            const double* bj = b.row(j);
            for (std::size_t c = 0; c < b.cols(); ++c) s += bi[c] * bj[c];
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("hadamard: shapes differ");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0, e = a.rows() * a.cols(); i < e; ++i)
        c.data()[i] = a.data()[i] * b.data()[i];
    return c;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("add: shapes differ");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0, e = a.rows() * a.cols(); i < e; ++i)
        c.data()[i] = a.data()[i] + b.data()[i];
    return c;
}

inline Matrix subtract(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("subtract: shapes differ");
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0, e = a.rows() * a.cols(); i < e; ++i)
        c.data()[i] = a.data()[i] - b.data()[i];
    return c;
}

inline Matrix scale(const Matrix& m, double factor) {
    Matrix c(m.rows(), m.cols());
    for (std::size_t i = 0, e = m.rows() * m.cols(); i < e; ++i)
        c.data()[i] = m.data()[i] * factor;
    return c;
}

inline double trace(const Matrix& m) {
    double s = 0.0;
    const std::size_t n = m.rows() < m.cols() ? m.rows() : m.cols();
    for (std::size_t i = 0; i < n; ++i) s += m(i, i);
    return s;
}

inline double sum_entries(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0, e = m.rows() * m.cols(); i < e; ++i) s += m.data()[i];
    return s;
}

inline double max_abs(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0, e = m.rows() * m.cols(); i < e; ++i)
        s = std::max(s, std::abs(m.data()[i]));
    return s;
}

// <A_i, A_j> over columns.
inline double column_dot(const Matrix& a, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * a(r, j);
    return s;
}

// <B^i, B^j> over rows.
inline double row_dot(const Matrix& b, std::size_t i, std::size_t j) {
    double s = 0.0;
    const double* bi = b.row(i);
    const double* bj = b.row(j);
    for (std::size_t c = 0; c < b.cols(); ++c) s += bi[c] * bj[c];
    return s;
}

inline std::vector<double> column_squared_norms(const Matrix& a) {
    std::vector<double> out(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out[c] += a(r, c) * a(r, c);
    return out;
}

inline std::vector<double> row_squared_norms(const Matrix& b) {
    std::vector<double> out(b.rows(), 0.0);
    for (std::size_t r = 0; r < b.rows(); ++r) {
        const double* br = b.row(r);
        double s = 0.0;
        for (std::size_t c = 0; c < b.cols(); ++c) s += br[c] * br[c];
        out[r] = s;
    }
    return out;
}

}  // namespace amm
