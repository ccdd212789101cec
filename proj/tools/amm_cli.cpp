//
// amm - command-line frontend: approximate a product from a weighted column
// subset (multiply), run the seeded experiment grid (bench), or run the
// randomized property checks (verify).
//
// Exit codes: 0 success, 1 verification failure, 2 usage or input error.
//

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "amm/amm.hpp"

namespace {

amm::Matrix load_matrix(const std::string& path) {
    try {
        return amm::read_matrix_file(path);
    } catch (const amm::ParseError& e) {
        throw amm::Error(path + ": " + e.what());
    }
}

std::vector<std::size_t> parse_k_list(const std::string& text, std::size_t n) {
    std::vector<std::size_t> out;
    if (text.empty()) {
        for (std::size_t k = 1; k <= n; ++k) out.push_back(k);
        return out;
    }
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            std::size_t pos = 0;
            const unsigned long v = std::stoul(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw amm::ConfigError("bad k value '" + tok + "'");
        }
    }
    if (out.empty()) throw amm::ConfigError("empty k list");
    return out;
}

std::vector<amm::BenchMethod> parse_methods(const std::string& text) {
    std::vector<amm::BenchMethod> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        if (tok == "jl") {
            out.push_back(amm::BenchMethod::jl());
            continue;
        }
        if (tok == "uniform-n-over-k") {
            out.push_back(amm::BenchMethod::of(amm::Selection::uniform, amm::RescaleRule::n_over_k));
            continue;
        }
        const auto plus = tok.find('+');
        if (plus == std::string::npos)
            throw amm::ConfigError("bad method '" + tok +
                                   "' (want selection+rescale, jl, or uniform-n-over-k)");
        amm::Selection sel;
        amm::RescaleRule res;
        if (!amm::parse_selection(tok.substr(0, plus), sel))
            throw amm::ConfigError("unknown selection '" + tok.substr(0, plus) + "'");
        if (!amm::parse_rescale(tok.substr(plus + 1), res))
            throw amm::ConfigError("unknown rescale '" + tok.substr(plus + 1) + "'");
        out.push_back(amm::BenchMethod::of(sel, res));
    }
    if (out.empty()) throw amm::ConfigError("empty method list");
    return out;
}

struct MultiplyArgs {
    std::string a_path, b_path, out_path;
    std::string selection = "greedy";
    std::string rescale = "optimal";
    std::size_t k = 1;
    std::uint64_t seed = 0;
    bool report_error = false;
};

int run_multiply(const MultiplyArgs& args) {
    const amm::Matrix a = load_matrix(args.a_path);
    const amm::Matrix b = load_matrix(args.b_path);
    if (a.cols() != b.rows())
        throw amm::Error("inner dimensions do not match: A is " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + ", B is " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
    if (args.k < 1 || args.k > a.cols())
        throw amm::Error("k must lie in [1, " + std::to_string(a.cols()) + "]");

    amm::MethodSpec spec;
    spec.k = args.k;
    if (!amm::parse_selection(args.selection, spec.selection))
        throw amm::Error("unknown selection '" + args.selection + "'");
    if (!amm::parse_rescale(args.rescale, spec.rescale))
        throw amm::Error("unknown rescale '" + args.rescale + "'");

    amm::RngStream rng(args.seed);
    const amm::ApproxResult res = amm::approximate_product(a, b, spec, rng);

    if (args.out_path.empty()) {
        amm::write_matrix(std::cout, res.approximant);
    } else {
        amm::write_matrix_file(args.out_path, res.approximant);
    }

    if (args.report_error) {
        const amm::ProductKernel kern = amm::build_kernel(a, b);
        const double trace_bound = amm::bound_trace(amm::partition(kern, res.subset));
        const double worst = amm::bound_greedy_worstcase(a, b, res.subset);
        std::cerr << "abs_error " << amm::format_double(res.abs_error_frobenius) << '\n'
                  << "rel_error_db " << amm::format_double(res.rel_error_db) << '\n'
                  << "bound_trace " << amm::format_double(trace_bound) << '\n'
                  << "bound_worstcase " << amm::format_double(worst) << '\n';
    }
    return 0;
}

struct BenchArgs {
    std::size_t m = 60, n = 15, p = 90;
    std::size_t matrices = 1, trials = 1;
    std::string k_list;
    std::string methods = "greedy+optimal";
    std::uint64_t seed = 0;
    std::string out_path;
    std::string summary_out;
    std::size_t threads = 1;
    bool no_timing = false;
};

int run_bench(const BenchArgs& args) {
    amm::ExperimentConfig cfg;
    cfg.m = args.m;
    cfg.n = args.n;
    cfg.p = args.p;
    cfg.num_matrices = args.matrices;
    cfg.trials_per_matrix = args.trials;
    cfg.k_values = parse_k_list(args.k_list, args.n);
    cfg.methods = parse_methods(args.methods);
    cfg.master_seed = args.seed;

    amm::RunOptions opts;
    opts.threads = args.threads;
    opts.measure_timing = !args.no_timing;

    const auto records = amm::run_experiment(cfg, opts);

    std::ofstream csv(args.out_path);
    if (!csv) throw amm::Error("cannot open output file: " + args.out_path);
    amm::write_csv(csv, records);

    // Manifest: everything needed to replay the run bit for bit.
    std::cout << "# bench master_seed=" << cfg.master_seed << " m=" << cfg.m << " n=" << cfg.n
              << " p=" << cfg.p << " matrices=" << cfg.num_matrices
              << " trials=" << cfg.trials_per_matrix << " k=" << [&] {
                     std::string s;
                     for (std::size_t i = 0; i < cfg.k_values.size(); ++i)
                         s += (i ? "," : "") + std::to_string(cfg.k_values[i]);
                     return s;
                 }()
              << " methods=" << args.methods
              << " rng=xoshiro256++ derive=splitmix64-chain gaussian=polar"
              << " records=" << records.size() << '\n';
    amm::summary_table(std::cout, amm::summarize(records));
    if (!args.summary_out.empty()) {
        std::ofstream sum(args.summary_out);
        if (!sum) throw amm::Error("cannot open summary file: " + args.summary_out);
        amm::summary_table(sum, amm::summarize(records));
    }
    return 0;
}

struct VerifyArgs {
    std::size_t n = 6, k = 2, instances = 50;
    std::uint64_t seed = 0;
    bool inject_schur_fault = false;
};

int run_verify(const VerifyArgs& args) {
    amm::VerifyOptions opt;
    opt.n = args.n;
    opt.k = args.k;
    opt.instances = args.instances;
    opt.seed = args.seed;
    opt.inject_schur_fault = args.inject_schur_fault;

    const auto results = amm::run_verification(opt);
    bool all_passed = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        all_passed = all_passed && r.passed;
    }
    if (!all_passed) {
        std::cout << "verification failed\n";
        return 1;
    }
    std::cout << "all properties passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"approximate matrix products from reweighted column subsets"};
    app.require_subcommand(1);

    MultiplyArgs mul_args;
    auto* mul = app.add_subcommand("multiply", "approximate A*B and write the result");
    mul->add_option("--a", mul_args.a_path, "left matrix file")->required();
    mul->add_option("--b", mul_args.b_path, "right matrix file")->required();
    mul->add_option("--k", mul_args.k, "subset size")->required();
    mul->add_option("--selection", mul_args.selection, "greedy|uniform|power|det-mh|det-exact");
    mul->add_option("--rescale", mul_args.rescale, "optimal|power|n-over-k");
    mul->add_option("--seed", mul_args.seed, "random seed");
    mul->add_option("--out", mul_args.out_path, "output path (default: stdout)");
    mul->add_flag("--report-error", mul_args.report_error,
                  "print error and bounds on standard error");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "run the seeded experiment grid, write CSV");
    bench->add_option("--m", bench_args.m, "rows of A");
    bench->add_option("--n", bench_args.n, "inner dimension");
    bench->add_option("--p", bench_args.p, "columns of B");
    bench->add_option("--matrices", bench_args.matrices, "number of instances");
    bench->add_option("--trials", bench_args.trials, "trials per instance for randomized methods");
    bench->add_option("--k-list", bench_args.k_list, "comma-separated k grid (default: 1..n)");
    bench->add_option("--methods", bench_args.methods,
                      "comma-separated selection+rescale pairs, jl, uniform-n-over-k");
    bench->add_option("--seed", bench_args.seed, "master seed");
    bench->add_option("--out", bench_args.out_path, "CSV output path")->required();
    bench->add_option("--summary-out", bench_args.summary_out, "also write the summary table here");
    bench->add_option("--threads", bench_args.threads, "worker threads (output is order-free)");
    bench->add_flag("--no-timing", bench_args.no_timing,
                    "write wall_time_micros as 0 for byte-stable CSV");

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify", "run randomized property checks");
    verify->add_option("--n", verify_args.n, "kernel size");
    verify->add_option("--k", verify_args.k, "subset size");
    verify->add_option("--instances", verify_args.instances, "instances per property");
    verify->add_option("--seed", verify_args.seed, "seed");
    verify->add_flag("--inject-schur-fault", verify_args.inject_schur_fault)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (mul->parsed()) return run_multiply(mul_args);
        if (bench->parsed()) return run_bench(bench_args);
        if (verify->parsed()) return run_verify(verify_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
