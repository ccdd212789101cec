//
// select.hpp - subset selection: uniform, power-weighted, greedy (largest
// kernel diagonal), and determinant-proportional sampling both by exact
// enumeration and by a Metropolis-Hastings chain.
//
// Randomized selectors consume an explicit RngStream so runs replay
// bit-identically; a stream must not be shared between threads.
//

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "amm/errors.hpp"
#include "amm/kernel.hpp"
#include "amm/rng.hpp"

namespace amm {

struct SelectionContext {
    const ProductKernel& kernel;
    std::size_t k = 1;
    RngStream& rng;
};

struct MHConfig {
    std::size_t burn_in = 500;
    std::size_t thinning = 1;
    enum class Proposal { single_swap };
    Proposal proposal = Proposal::single_swap;
};

// Exact determinant-proportional sampling enumerates all k-subsets; above
// this count callers are pointed at the MH sampler instead.
inline constexpr std::uint64_t kEnumerationCap = 2'000'000;

namespace detail {

inline void check_cardinality(std::size_t k, std::size_t n) {
    if (k < 1 || k > n)
        throw CardinalityError("subset size " + std::to_string(k) +
                               " out of range for n=" + std::to_string(n));
}

// Uniform k-subset by selection sampling: index i is accepted with
// probability (still needed)/(still available), which induces the uniform
// law over k-subsets and emits sorted indices.
inline std::vector<std::size_t> uniform_draw(std::size_t n, std::size_t k, RngStream& rng) {
    std::vector<std::size_t> idx;
    idx.reserve(k);
    std::size_t need = k;
    for (std::size_t i = 0; i < n && need > 0; ++i) {
        if (rng.uniform01() * static_cast<double>(n - i) < static_cast<double>(need)) {
            idx.push_back(i);
            --need;
        }
    }
    // Rounding can in principle leave a shortfall; top up from the tail.
    for (std::size_t i = n; need > 0 && i-- > 0;) {
        if (std::find(idx.begin(), idx.end(), i) == idx.end()) {
            idx.push_back(i);
            --need;
        }
    }
    std::sort(idx.begin(), idx.end());
    return idx;
}

// k distinct indices drawn sequentially without replacement, each draw
// proportional to the remaining weights.
inline std::vector<std::size_t> power_draw(const std::vector<double>& weights_in, std::size_t k,
                                           RngStream& rng) {
    std::vector<double> w = weights_in;
    std::size_t positive = 0;
    for (double v : w)
        if (v > 0.0) ++positive;
    if (positive < k)
        throw DegenerateWeightsError("fewer than k indices carry positive weight");

    std::vector<std::size_t> idx;
    idx.reserve(k);
    for (std::size_t draw = 0; draw < k; ++draw) {
        double total = 0.0;
        for (double v : w) total += v;
        const double u = rng.uniform01() * total;
        double cum = 0.0;
        std::size_t chosen = w.size();
        std::size_t last_positive = w.size();
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] <= 0.0) continue;
            last_positive = i;
            cum += w[i];
            if (u < cum) {
                chosen = i;
                break;
            }
        }
        if (chosen == w.size()) chosen = last_positive;  // rounding guard
        idx.push_back(chosen);
        w[chosen] = 0.0;
    }
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Indices of the k largest values, ties to the lowest index.
inline std::vector<std::size_t> greedy_indices(const std::vector<double>& values, std::size_t k) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

// Lexicographic combination enumeration; start from {0,...,k-1}.
inline bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    const std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] + (k - i) < n) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace detail

// C(n,k), saturating at kEnumerationCap+1 once it is clear the cap is blown.
inline std::uint64_t binomial_count(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        const std::uint64_t factor = n - k + i;
        if (c > std::numeric_limits<std::uint64_t>::max() / factor) return kEnumerationCap + 1;
        c = c * factor / i;
        if (c > kEnumerationCap) return kEnumerationCap + 1;
    }
    return c;
}

inline Subset select_uniform(const SelectionContext& ctx) {
    detail::check_cardinality(ctx.k, ctx.kernel.n);
    return Subset{detail::uniform_draw(ctx.kernel.n, ctx.k, ctx.rng), Provenance::uniform};
}

inline Subset select_power(const SelectionContext& ctx) {
    detail::check_cardinality(ctx.k, ctx.kernel.n);
    return Subset{detail::power_draw(ctx.kernel.diag, ctx.k, ctx.rng), Provenance::power};
}

inline Subset select_greedy(const SelectionContext& ctx) {
    detail::check_cardinality(ctx.k, ctx.kernel.n);
    return Subset{detail::greedy_indices(ctx.kernel.diag, ctx.k), Provenance::greedy};
}

// Exact determinant-proportional draw by two-pass enumeration: one pass for
// the normalizer, one to locate the drawn subset. O(1) extra memory.
inline Subset select_determinant_exact(const SelectionContext& ctx) {
    const std::size_t n = ctx.kernel.n;
    const std::size_t k = ctx.k;
    detail::check_cardinality(k, n);
    if (binomial_count(n, k) > kEnumerationCap)
        throw EnumerationTooLargeError(
            "too many k-subsets to enumerate; use the Metropolis-Hastings sampler");

    std::vector<std::size_t> comb(k);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    double total = 0.0;
    do {
        total += minor_determinant(ctx.kernel, comb);
    } while (detail::next_combination(comb, n));
    if (!(total > 0.0))
        throw DegenerateKernelError("every k-subset has a singular principal minor");

    const double u = ctx.rng.uniform01() * total;
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    std::vector<std::size_t> last_positive;
    double cum = 0.0;
    do {
        const double d = minor_determinant(ctx.kernel, comb);
        if (d > 0.0) {
            last_positive = comb;
            cum += d;
            if (u < cum) return Subset{comb, Provenance::determinant_exact};
        }
    } while (detail::next_combination(comb, n));
    return Subset{last_positive, Provenance::determinant_exact};  // rounding guard
}

namespace detail {

// Single-swap Metropolis-Hastings chain with stationary law ∝ det(Q_J):
// remove a uniformly chosen member, insert an outside index drawn with
// probability proportional to its kernel diagonal, accept with the ratio
// det(Q_J')·q(J'→J) / (det(Q_J)·q(J→J')).
struct MhChain {
    const ProductKernel& kernel;
    RngStream& rng;
    std::vector<std::size_t> current;  // sorted
    std::vector<char> member;
    double det = 0.0;
    double outside_power = 0.0;

    MhChain(const ProductKernel& kern, RngStream& stream, std::vector<std::size_t> start)
        : kernel(kern), rng(stream), current(std::move(start)), member(kern.n, 0) {
        for (std::size_t i : current) member[i] = 1;
        det = minor_determinant(kernel, current);
        outside_power = 0.0;
        for (std::size_t i = 0; i < kernel.n; ++i)
            if (!member[i]) outside_power += kernel.diag[i];
    }

    void step() {
        const std::size_t n = kernel.n;
        const std::size_t k = current.size();
        if (k == n || outside_power <= 0.0) return;  // no move available

        const std::size_t rpos = static_cast<std::size_t>(rng.uniform_below(k));
        const std::size_t out_idx = current[rpos];

        const double u = rng.uniform01() * outside_power;
        double cum = 0.0;
        std::size_t in_idx = n;
        std::size_t last_positive = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (member[i] || kernel.diag[i] <= 0.0) continue;
            last_positive = i;
            cum += kernel.diag[i];
            if (u < cum) {
                in_idx = i;
                break;
            }
        }
        if (in_idx == n) in_idx = last_positive;
        if (in_idx == n) return;

        std::vector<std::size_t> cand = current;
        cand[rpos] = in_idx;
        std::sort(cand.begin(), cand.end());
        const double det_new = minor_determinant(kernel, cand);
        const double outside_new = outside_power - kernel.diag[in_idx] + kernel.diag[out_idx];

        // ratio = (det_new·diag[out]/outside_new) / (det·diag[in]/outside)
        const double num = det_new * kernel.diag[out_idx] * outside_power;
        const double den = det * kernel.diag[in_idx] * outside_new;
        if (!(den > 0.0)) return;
        if (rng.uniform01() * den < num) {
            member[out_idx] = 0;
            member[in_idx] = 1;
            current = std::move(cand);
            det = det_new;
            outside_power = outside_new;
        }
    }
};

inline std::vector<std::size_t> mh_initial_subset(const SelectionContext& ctx) {
    std::vector<std::size_t> start = greedy_indices(ctx.kernel.diag, ctx.k);
    if (minor_determinant(ctx.kernel, start) > 0.0) return start;
    for (int attempt = 0; attempt < 10; ++attempt) {
        try {
            start = power_draw(ctx.kernel.diag, ctx.k, ctx.rng);
        } catch (const DegenerateWeightsError&) {
            break;
        }
        if (minor_determinant(ctx.kernel, start) > 0.0) return start;
    }
    throw DegenerateKernelError("could not find a k-subset with nonsingular minor to start the chain");
}

}  // namespace detail

// Runs one chain: burn_in steps discarded, then one state recorded per
// `thinning` further steps, `count` states in all.
inline std::vector<Subset> mh_chain_samples(const SelectionContext& ctx, const MHConfig& cfg,
                                            std::size_t count) {
    const std::size_t n = ctx.kernel.n;
    detail::check_cardinality(ctx.k, n);
    if (cfg.thinning < 1) throw ConfigError("thinning must be at least 1");

    std::vector<Subset> out;
    out.reserve(count);
    if (ctx.k == n) {
        std::vector<std::size_t> full(n);
        std::iota(full.begin(), full.end(), std::size_t{0});
        out.assign(count, Subset{full, Provenance::determinant_mh});
        return out;
    }

    detail::MhChain chain(ctx.kernel, ctx.rng, detail::mh_initial_subset(ctx));
    for (std::size_t t = 0; t < cfg.burn_in; ++t) chain.step();
    for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t t = 0; t < cfg.thinning; ++t) chain.step();
        out.push_back(Subset{chain.current, Provenance::determinant_mh});
    }
    return out;
}

inline Subset select_determinant_mh(const SelectionContext& ctx, const MHConfig& cfg = {}) {
    return mh_chain_samples(ctx, cfg, 1).front();
}

// Enumerated determinant-proportional law over all k-subsets; a test oracle
// for both determinant samplers.
struct SubsetLaw {
    std::vector<std::vector<std::size_t>> subsets;  // lexicographic order
    std::vector<double> probabilities;
};

inline SubsetLaw determinant_law(const ProductKernel& kernel, std::size_t k) {
    const std::size_t n = kernel.n;
    detail::check_cardinality(k, n);
    if (binomial_count(n, k) > kEnumerationCap)
        throw EnumerationTooLargeError("too many k-subsets to enumerate");

    SubsetLaw law;
    std::vector<std::size_t> comb(k);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    double total = 0.0;
    do {
        const double d = minor_determinant(kernel, comb);
        law.subsets.push_back(comb);
        law.probabilities.push_back(d);
        total += d;
    } while (detail::next_combination(comb, n));
    if (!(total > 0.0))
        throw DegenerateKernelError("every k-subset has a singular principal minor");
    for (double& p : law.probabilities) p /= total;
    return law;
}

// Exact E[tr(S_C(Q_J))] under the determinant-proportional law, by full
// enumeration — no sampling noise.
inline double enumerated_expected_schur_trace(const ProductKernel& kernel, std::size_t k) {
    const std::size_t n = kernel.n;
    detail::check_cardinality(k, n);
    if (binomial_count(n, k) > kEnumerationCap)
        throw EnumerationTooLargeError("too many k-subsets to enumerate");

    std::vector<std::size_t> comb(k);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    double num = 0.0;
    double den = 0.0;
    do {
        const double d = minor_determinant(kernel, comb);
        if (d > 0.0) {
            const KernelPartition p = partition(kernel, Subset{comb, Provenance::explicit_set});
            num += d * trace(schur_complement(p));
            den += d;
        }
    } while (detail::next_combination(comb, n));
    if (!(den > 0.0))
        throw DegenerateKernelError("every k-subset has a singular principal minor");
    return num / den;
}

}  // namespace amm
