//
// verify.hpp - randomized identity and inequality checks over the kernel,
// selection, and reweighting layers, runnable from the CLI. Each property
// draws its own instances from seeds derived off (seed, property name,
// index), so a failure message pins down the exact instance to replay.
//

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "amm/approx.hpp"
#include "amm/bench.hpp"
#include "amm/errors.hpp"
#include "amm/kernel.hpp"
#include "amm/matrix.hpp"
#include "amm/rescale.hpp"
#include "amm/rng.hpp"
#include "amm/select.hpp"

namespace amm {

struct VerifyOptions {
    std::size_t n = 6;          // kernel size; instances use A (n+2)×n, B n×(n+3)
    std::size_t k = 2;
    std::size_t instances = 50;
    std::uint64_t seed = 0;
    bool inject_schur_fault = false;  // test-only: flips the Schur cross-term sign
};

struct PropertyResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

namespace detail {

inline std::string seed_hex(std::uint64_t seed) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(seed));
    return buf;
}

inline void gaussian_pair(RngStream& rng, std::size_t n, Matrix& a, Matrix& b) {
    a = gaussian_matrix(n + 2, n, rng);
    b = gaussian_matrix(n, n + 3, rng);
}

inline double max_entry(const Matrix& m) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) best = std::max(best, m(i, j));
    return best;
}

// Runs `check` on `instances` independently seeded instances; stops at the
// first violation and reports its seed.
template <typename Fn>
PropertyResult run_property(const VerifyOptions& opt, const char* name, Fn&& check) {
    PropertyResult res;
    res.name = name;
    for (std::size_t i = 0; i < opt.instances; ++i) {
        const std::uint64_t seed = derive_seed(opt.seed, tag_field(name), i);
        RngStream rng(seed);
        std::string why;
        if (!check(rng, why)) {
            res.passed = false;
            res.detail = "failing instance seed " + seed_hex(seed) +
                         (why.empty() ? "" : ": " + why);
            return res;
        }
    }
    res.detail = std::to_string(opt.instances) + " instances";
    return res;
}

}  // namespace detail

inline std::vector<PropertyResult> run_verification(const VerifyOptions& opt) {
    if (opt.n < 2) throw ConfigError("verification needs n >= 2");
    if (opt.k < 1 || opt.k > opt.n)
        throw CardinalityError("k must lie in [1, n]");
    if (opt.instances < 1) throw ConfigError("need at least one instance");

    struct FaultGuard {
        bool prev;
        explicit FaultGuard(bool on) : prev(detail::schur_sign_fault.exchange(on)) {}
        ~FaultGuard() { detail::schur_sign_fault.store(prev); }
    } fault_guard(opt.inject_schur_fault);

    const std::size_t n = opt.n;
    const std::size_t k = opt.k;
    const std::size_t k_small = std::min<std::size_t>({k, 3, n - 1 > 0 ? n - 1 : 1});

    std::vector<PropertyResult> out;

    out.push_back(detail::run_property(opt, "kernel-psd", [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const SymEigen eig = sym_eigen(build_kernel(a, b).q);
        const double lmax = std::max(eig.eigenvalues.front(), 1e-14);
        if (eig.eigenvalues.back() < -1e-9 * lmax) {
            why = "min eigenvalue " + format_double(eig.eigenvalues.back());
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "entry-sum-identity",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const double lhs = frobenius_product_identity(a, b);
        const double f = frobenius_norm(matmul(a, b));
        const double rhs = f * f;
        if (std::abs(lhs - rhs) > 1e-9 * std::max(rhs, 1e-14)) {
            why = "entry sum " + format_double(lhs) + " vs " + format_double(rhs);
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "schur-determinant-ratio",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const ProductKernel kern = build_kernel(a, b);
        const Subset j{detail::uniform_draw(n, k_small, rng), Provenance::explicit_set};
        const Matrix s = schur_complement(partition(kern, j));
        const auto comp = detail::complement_indices(n, j);
        const double tol = 1e-8 * std::max(max_abs(s), 1e-12);
        for (std::size_t r = 0; r < comp.size(); ++r)
            for (std::size_t c = 0; c < comp.size(); ++c) {
                const double ratio = crabtree_haynsworth_entry(kern, j, comp[r], comp[c]);
                if (std::abs(s(r, c) - ratio) > tol) {
                    why = "entry (" + std::to_string(comp[r]) + "," + std::to_string(comp[c]) +
                          ") " + format_double(s(r, c)) + " vs " + format_double(ratio);
                    return false;
                }
            }
        return true;
    }));

    out.push_back(detail::run_property(opt, "fischer-inequality",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const ProductKernel kern = build_kernel(a, b);
        const Subset j{detail::uniform_draw(n, k_small, rng), Provenance::explicit_set};
        const double dj = minor_determinant(kern, j.indices);
        for (std::size_t i : detail::complement_indices(n, j)) {
            auto grown = j.indices;
            grown.push_back(i);
            std::sort(grown.begin(), grown.end());
            const double lhs = minor_determinant(kern, grown);
            const double rhs = dj * kern.diag[i];
            if (lhs > rhs * (1.0 + 1e-9)) {
                why = "det grew from " + format_double(rhs) + " to " + format_double(lhs);
                return false;
            }
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "diagonal-max", [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const ProductKernel kern = build_kernel(a, b);
        double max_diag = 0.0;
        for (double d : kern.diag) max_diag = std::max(max_diag, d);
        const double top = detail::max_entry(kern.q);
        if (!(max_diag > 0.0) || top > max_diag * (1.0 + 1e-12)) {
            why = "max entry " + format_double(top) + " vs max diagonal " + format_double(max_diag);
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "schur-max-entry",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const ProductKernel kern = build_kernel(a, b);
        const Subset j{detail::uniform_draw(n, std::min(k, n - 1), rng), Provenance::explicit_set};
        const KernelPartition part = partition(kern, j);
        const Matrix s = schur_complement(part);
        double max_z_diag = 0.0;
        for (std::size_t i = 0; i < part.z.rows(); ++i)
            max_z_diag = std::max(max_z_diag, part.z(i, i));
        const double top = detail::max_entry(s);
        if (top > max_z_diag + 1e-9 * std::max(1.0, max_z_diag)) {
            why = "Schur entry " + format_double(top) + " above diagonal cap " +
                  format_double(max_z_diag);
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "expected-trace-bound",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const ProductKernel kern = build_kernel(a, b);
        const double lhs = enumerated_expected_schur_trace(kern, k_small);
        const SymEigen eig = sym_eigen(kern.q);
        double tail = 0.0;
        for (std::size_t i = k_small; i < n; ++i) tail += std::max(eig.eigenvalues[i], 0.0);
        const double rhs = static_cast<double>(k_small + 1) * tail;
        if (lhs > rhs + 1e-9 * std::max(1.0, rhs)) {
            why = "expected trace " + format_double(lhs) + " above bound " + format_double(rhs);
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "error-identity", [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const ProductKernel kern = build_kernel(a, b);
        const Subset j{detail::uniform_draw(n, k, rng), Provenance::explicit_set};
        const Matrix exact = matmul(a, b);
        const Matrix approx = apply(a, b, optimal_weights(kern, j));
        const double err = frobenius_norm(subtract(exact, approx));
        const double err2 = err * err;
        const double sc_sum =
            j.k() == n ? 0.0 : sum_entries(schur_complement(partition(kern, j)));
        const double f = frobenius_norm(exact);
        if (std::abs(err2 - sc_sum) > 1e-8 * std::max(f * f, 1e-14)) {
            why = "squared error " + format_double(err2) + " vs Schur entry sum " +
                  format_double(sc_sum);
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "optimal-dominates",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const ProductKernel kern = build_kernel(a, b);
        const Subset j{detail::uniform_draw(n, k, rng), Provenance::explicit_set};
        const Matrix exact = matmul(a, b);
        const double err_opt =
            frobenius_norm(subtract(exact, apply(a, b, optimal_weights(kern, j))));
        const double err_pow =
            frobenius_norm(subtract(exact, apply(a, b, power_weights(a, b, j))));
        const double err_nk =
            frobenius_norm(subtract(exact, apply(a, b, n_over_k_weights(n, j))));
        const double slack = 1e-12 * std::max({1.0, err_pow, err_nk});
        if (err_opt > err_pow + slack || err_opt > err_nk + slack) {
            why = "optimal " + format_double(err_opt) + " vs power " + format_double(err_pow) +
                  ", flat " + format_double(err_nk);
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "trace-bound-dominates",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const ProductKernel kern = build_kernel(a, b);
        const Subset j{detail::uniform_draw(n, std::min(k, n - 1), rng), Provenance::explicit_set};
        const Matrix exact = matmul(a, b);
        const double err =
            frobenius_norm(subtract(exact, apply(a, b, optimal_weights(kern, j))));
        const double bound = bound_trace(partition(kern, j));
        if (err * err > bound + 1e-9 * std::max(1.0, bound)) {
            why = "squared error " + format_double(err * err) + " above trace bound " +
                  format_double(bound);
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "worstcase-bound-dominates",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const ProductKernel kern = build_kernel(a, b);
        const Subset j{detail::uniform_draw(n, k, rng), Provenance::explicit_set};
        const Matrix exact = matmul(a, b);
        const double err =
            frobenius_norm(subtract(exact, apply(a, b, optimal_weights(kern, j))));
        const double bound = bound_greedy_worstcase(a, b, j);
        if (err > bound + 1e-9 * std::max(1.0, bound)) {
            why = "error " + format_double(err) + " above worst-case bound " +
                  format_double(bound);
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "expected-bound-dominates",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const std::size_t kc = std::min<std::size_t>({k, 2, n - 1});
        if (binomial_count(n, kc) > 5000) return true;  // enumeration oracle only at small n
        const ProductKernel kern = build_kernel(a, b);
        const SubsetLaw law = determinant_law(kern, kc);
        const Matrix exact = matmul(a, b);
        double avg = 0.0;
        for (std::size_t i = 0; i < law.subsets.size(); ++i) {
            if (law.probabilities[i] <= 0.0) continue;
            const Subset j{law.subsets[i], Provenance::explicit_set};
            avg += law.probabilities[i] *
                   frobenius_norm(subtract(exact, apply(a, b, optimal_weights(kern, j))));
        }
        const double bound = bound_expected_random(kern, kc);
        if (avg > bound + 1e-9 * std::max(1.0, bound)) {
            why = "law-averaged error " + format_double(avg) + " above bound " +
                  format_double(bound);
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "majorization-prefixes",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const MajorizationReport rep = bound_majorization_check(a, b);
        if (!rep.holds) {
            double worst = 0.0;
            for (double m : rep.margins) worst = std::min(worst, m);
            why = "worst prefix margin " + format_double(worst);
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "x-residual-bound",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const XResidualReport rep = bound_x_residual(a, b, k);
        if (!rep.holds) {
            why = "residual " + format_double(rep.lhs) + " above " + format_double(rep.rhs);
            return false;
        }
        return true;
    }));

    out.push_back(detail::run_property(opt, "nystrom-structure",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const ProductKernel kern = build_kernel(a, b);
        const Subset j{detail::uniform_draw(n, std::min(k, n - 1), rng), Provenance::explicit_set};
        const KernelPartition part = partition(kern, j);
        const Matrix approx = nystrom_approximation(part);
        const Matrix s = schur_complement(part);
        const auto comp = detail::complement_indices(n, j);
        const double scale = std::max(frobenius_norm(kern.q), 1e-14);
        // Difference vanishes outside the complement block...
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) {
                const bool in_z = !j.contains(r) && !j.contains(c);
                if (in_z) continue;
                if (std::abs(kern.q(r, c) - approx(r, c)) > 1e-9 * scale) {
                    why = "nonzero difference at (" + std::to_string(r) + "," +
                          std::to_string(c) + ")";
                    return false;
                }
            }
        // ...and equals the Schur complement inside it.
        for (std::size_t r = 0; r < comp.size(); ++r)
            for (std::size_t c = 0; c < comp.size(); ++c) {
                const double diff = kern.q(comp[r], comp[c]) - approx(comp[r], comp[c]);
                if (std::abs(diff - s(r, c)) > 1e-8 * scale) {
                    why = "complement block mismatch at (" + std::to_string(comp[r]) + "," +
                          std::to_string(comp[c]) + ")";
                    return false;
                }
            }
        return true;
    }));

    out.push_back(detail::run_property(opt, "full-subset-edge",
                                       [&](RngStream& rng, std::string& why) {
        Matrix a, b;
        detail::gaussian_pair(rng, n, a, b);
        const ProductKernel kern = build_kernel(a, b);
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        const Subset j{all, Provenance::explicit_set};
        const KernelPartition part = partition(kern, j);
        if (part.z.rows() != 0 || part.y.cols() != 0) {
            why = "full subset left a nonempty remainder block";
            return false;
        }
        const WeightedApproximant wa = optimal_weights(kern, j);
        for (double w : wa.weights)
            if (w != 1.0) {
                why = "full-subset weight " + format_double(w);
                return false;
            }
        const Matrix exact = matmul(a, b);
        const Matrix approx = apply(a, b, wa);
        if (!(approx == exact)) {
            why = "full-subset approximant is not bit-identical to the product";
            return false;
        }
        return true;
    }));

    return out;
}

}  // namespace amm
