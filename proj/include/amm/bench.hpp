//
// bench.hpp - seeded experiment harness: draw Gaussian instances, run every
// (matrix, method, k, trial) cell, and emit CSV plus a summary table.
//
// Replay contract: the record stream is a pure function of the master seed.
// Every cell derives its own stream from (master, matrix_id, selection tag,
// k, trial) — the rescale tag is deliberately excluded so paired rescale arms
// see the same subsets — and records land in preassigned slots, so thread
// count and schedule cannot change the output.
//

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "amm/approx.hpp"
#include "amm/errors.hpp"
#include "amm/io.hpp"
#include "amm/matrix.hpp"
#include "amm/rng.hpp"

namespace amm {

struct BenchMethod {
    bool is_jl = false;
    Selection selection = Selection::greedy;
    RescaleRule rescale = RescaleRule::optimal;

    static BenchMethod jl() {
        BenchMethod m;
        m.is_jl = true;
        return m;
    }
    static BenchMethod of(Selection s, RescaleRule r) {
        BenchMethod m;
        m.selection = s;
        m.rescale = r;
        return m;
    }

    std::string selection_label() const { return is_jl ? "jl" : selection_tag(selection); }
    std::string rescale_label() const { return is_jl ? "none" : rescale_csv_tag(rescale); }
    // Greedy selection is a pure function of the instance, so extra trials
    // would repeat the same number; such methods run a single trial.
    bool deterministic() const { return !is_jl && selection == Selection::greedy; }
};

struct ExperimentConfig {
    std::size_t m = 60, n = 15, p = 90;
    std::size_t num_matrices = 1;
    std::size_t trials_per_matrix = 1;
    std::vector<std::size_t> k_values;
    std::vector<BenchMethod> methods;
    std::uint64_t master_seed = 0;
    MHConfig mh;  // chain settings for det-mh cells
};

struct ExperimentRecord {
    std::size_t matrix_id = 0;
    std::string selection;
    std::string rescale;
    std::size_t k = 0;
    std::size_t trial = 0;
    double abs_error = 0.0;
    double rel_error_db = 0.0;
    double wall_time_micros = 0.0;
};

struct RunOptions {
    std::size_t threads = 1;
    // Off: wall_time_micros is written as 0 so repeated runs (and runs at
    // different thread counts) produce byte-identical CSV.
    bool measure_timing = true;
};

namespace detail {

inline void validate_config(const ExperimentConfig& cfg) {
    if (cfg.m < 1 || cfg.n < 1 || cfg.p < 1) throw ConfigError("matrix dimensions must be positive");
    if (cfg.num_matrices < 1) throw ConfigError("need at least one matrix instance");
    if (cfg.trials_per_matrix < 1) throw ConfigError("need at least one trial");
    if (cfg.k_values.empty()) throw ConfigError("k grid is empty");
    for (std::size_t k : cfg.k_values)
        if (k < 1 || k > cfg.n)
            throw ConfigError("k=" + std::to_string(k) + " out of range for n=" +
                              std::to_string(cfg.n));
    if (cfg.methods.empty()) throw ConfigError("method list is empty");
}

inline Matrix gaussian_matrix(std::size_t rows, std::size_t cols, RngStream& rng) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

}  // namespace detail

inline std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg,
                                                    const RunOptions& opts = {}) {
    detail::validate_config(cfg);

    // Instance i is a pure function of (master_seed, i): A filled row-major,
    // then B, from one derived stream.
    std::vector<std::pair<Matrix, Matrix>> instances;
    instances.reserve(cfg.num_matrices);
    for (std::size_t id = 0; id < cfg.num_matrices; ++id) {
        RngStream g(derive_seed(cfg.master_seed, tag_field("matrix"),
                                static_cast<std::uint64_t>(id)));
        Matrix a = detail::gaussian_matrix(cfg.m, cfg.n, g);
        Matrix b = detail::gaussian_matrix(cfg.n, cfg.p, g);
        instances.emplace_back(std::move(a), std::move(b));
    }

    struct Cell {
        std::size_t slot, matrix_id, method_idx, k, trial;
    };
    std::vector<Cell> cells;
    for (std::size_t mid = 0; mid < cfg.num_matrices; ++mid)
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
            const std::size_t trials =
                cfg.methods[mi].deterministic() ? 1 : cfg.trials_per_matrix;
            for (std::size_t k : cfg.k_values)
                for (std::size_t t = 0; t < trials; ++t)
                    cells.push_back(Cell{cells.size(), mid, mi, k, t});
        }

    std::vector<ExperimentRecord> records(cells.size());
    const auto run_cell = [&](const Cell& c) {
        const BenchMethod& meth = cfg.methods[c.method_idx];
        const auto& [a, b] = instances[c.matrix_id];
        RngStream rng(derive_seed(cfg.master_seed, tag_field("cell"),
                                  static_cast<std::uint64_t>(c.matrix_id),
                                  tag_field(meth.selection_label()),
                                  static_cast<std::uint64_t>(c.k),
                                  static_cast<std::uint64_t>(c.trial)));
        const auto start = std::chrono::steady_clock::now();
        ApproxResult res;
        if (meth.is_jl) {
            res = jl_approximate(a, b, c.k, rng);
        } else {
            MethodSpec spec;
            spec.selection = meth.selection;
            spec.rescale = meth.rescale;
            spec.k = c.k;
            res = approximate_product(a, b, spec, rng, cfg.mh);
        }
        double micros = 0.0;
        if (opts.measure_timing) {
            const auto stop = std::chrono::steady_clock::now();
            micros = std::chrono::duration<double, std::micro>(stop - start).count();
        }
        ExperimentRecord& rec = records[c.slot];
        rec.matrix_id = c.matrix_id;
        rec.selection = meth.selection_label();
        rec.rescale = meth.rescale_label();
        rec.k = c.k;
        rec.trial = c.trial;
        rec.abs_error = res.abs_error_frobenius;
        rec.rel_error_db = res.rel_error_db;
        rec.wall_time_micros = micros;
    };

    const std::size_t threads = std::max<std::size_t>(1, opts.threads);
    if (threads == 1) {
        for (const Cell& c : cells) run_cell(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                    if (i >= cells.size()) return;
                    try {
                        run_cell(cells[i]);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    return records;
}

struct SummaryRow {
    std::string selection;
    std::string rescale;
    std::size_t k = 0;
    std::size_t count = 0;
    double mean_db = 0.0;
    double stderr_db = 0.0;
    double mean_abs_error = 0.0;
};

// Per (selection, rescale, k): dB-domain mean and standard error plus the
// linear-domain mean, pooled over matrices and trials. Rows keep
// first-appearance order, which for run_experiment output is method-major
// then k, matching the config.
inline std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
    if (records.empty()) throw EmptyInputError("no records to summarize");

    std::vector<SummaryRow> rows;
    std::vector<std::vector<double>> dbs;
    std::vector<double> abs_sums;
    for (const ExperimentRecord& r : records) {
        std::size_t g = rows.size();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].selection == r.selection && rows[i].rescale == r.rescale &&
                rows[i].k == r.k) {
                g = i;
                break;
            }
        }
        if (g == rows.size()) {
            SummaryRow row;
            row.selection = r.selection;
            row.rescale = r.rescale;
            row.k = r.k;
            rows.push_back(std::move(row));
            dbs.emplace_back();
            abs_sums.push_back(0.0);
        }
        dbs[g].push_back(r.rel_error_db);
        abs_sums[g] += r.abs_error;
    }

    for (std::size_t g = 0; g < rows.size(); ++g) {
        SummaryRow& row = rows[g];
        row.count = dbs[g].size();
        row.mean_abs_error = abs_sums[g] / static_cast<double>(row.count);
        bool has_inf = false;
        double sum = 0.0;
        for (double v : dbs[g]) {
            if (!std::isfinite(v)) has_inf = true;
            sum += v;
        }
        if (has_inf) {
            row.mean_db = -std::numeric_limits<double>::infinity();
            row.stderr_db = 0.0;
            continue;
        }
        row.mean_db = sum / static_cast<double>(row.count);
        if (row.count > 1) {
            double ss = 0.0;
            for (double v : dbs[g]) ss += (v - row.mean_db) * (v - row.mean_db);
            row.stderr_db = std::sqrt(ss / static_cast<double>(row.count - 1)) /
                            std::sqrt(static_cast<double>(row.count));
        }
    }
    return rows;
}

inline void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
    out << "matrix_id,selection,rescale,k,trial,abs_error,rel_error_db,wall_time_micros\n";
    for (const ExperimentRecord& r : records) {
        out << r.matrix_id << ',' << r.selection << ',' << r.rescale << ',' << r.k << ','
            << r.trial << ',' << format_double(r.abs_error) << ','
            << format_double(r.rel_error_db) << ',' << format_double(r.wall_time_micros)
            << '\n';
    }
}

inline void summary_table(std::ostream& out, const std::vector<SummaryRow>& rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %-9s %4s %6s %12s %12s %14s", "selection",
                  "rescale", "k", "count", "mean_db", "stderr_db", "mean_abs_error");
    out << line << '\n';
    for (const SummaryRow& r : rows) {
        std::snprintf(line, sizeof line, "%-10s %-9s %4zu %6zu %12.4f %12.4f %14.6g",
                      r.selection.c_str(), r.rescale.c_str(), r.k, r.count, r.mean_db,
                      r.stderr_db, r.mean_abs_error);
        out << line << '\n';
    }
}

}  // namespace amm
