#pragma once

// Shared helpers for the test suites: independent reference implementations
// (naive loops, entrywise formulas) used as oracles against the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amm/amm.hpp"

namespace test_support {

inline amm::Matrix gaussian(std::size_t rows, std::size_t cols, amm::RngStream& rng) {
    amm::Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

// Random SPD matrix with a well-spread spectrum: G^T G + eps I.
inline amm::Matrix random_spd(std::size_t n, amm::RngStream& rng, double eps = 1e-3) {
    const amm::Matrix g = gaussian(n + 2, n, rng);
    amm::Matrix q = amm::gram(g);
    for (std::size_t i = 0; i < n; ++i) q(i, i) += eps;
    return q;
}

// Textbook triple loop in ijk order; deliberately different accumulation
// order from the library's ikj kernel.
inline amm::Matrix naive_matmul(const amm::Matrix& a, const amm::Matrix& b) {
    amm::Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < a.cols(); ++l) acc += a(i, l) * b(l, j);
            c(i, j) = acc;
        }
    return c;
}

// Kernel entry straight from the defining inner products.
inline double kernel_entry(const amm::Matrix& a, const amm::Matrix& b, std::size_t i,
                           std::size_t j) {
    double col = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) col += a(r, i) * a(r, j);
    double row = 0.0;
    for (std::size_t c = 0; c < b.cols(); ++c) row += b(i, c) * b(j, c);
    return col * row;
}

// Weighted sum of rank-one terms, computed term by term.
inline amm::Matrix rank_one_sum(const amm::Matrix& a, const amm::Matrix& b,
                                const std::vector<std::size_t>& idx,
                                const std::vector<double>& w) {
    amm::Matrix c(a.rows(), b.cols());
    for (std::size_t t = 0; t < idx.size(); ++t)
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j)
                c(i, j) += w[t] * a(i, idx[t]) * b(idx[t], j);
    return c;
}

inline double frob_distance(const amm::Matrix& x, const amm::Matrix& y) {
    return amm::frobenius_norm(amm::subtract(x, y));
}

// Total variation distance between an empirical subset histogram and a law.
inline double tv_distance(const std::map<std::vector<std::size_t>, std::size_t>& counts,
                          const amm::SubsetLaw& law, std::size_t draws) {
    double tv = 0.0;
    for (std::size_t s = 0; s < law.subsets.size(); ++s) {
        const auto it = counts.find(law.subsets[s]);
        const double emp = it == counts.end()
                               ? 0.0
                               : static_cast<double>(it->second) / static_cast<double>(draws);
        tv += std::abs(emp - law.probabilities[s]);
    }
    return 0.5 * tv;
}

}  // namespace test_support
