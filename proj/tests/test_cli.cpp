#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "catch2/catch_amalgamated.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class TempDir {
  public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("amm_cli_test_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

  private:
    static inline int counter_ = 0;
    fs::path path_;
};

CliResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(AMM_CLI_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    CliResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    res.out = slurp(out);
    res.err = slurp(err);
    return res;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

// Integer-valued collinear pair: second column twice the first, B = A^T.
const char* kCollinearA = "2 2\n1 2\n2 4\n";
const char* kCollinearB = "2 2\n1 2\n2 4\n";

}  // namespace

TEST_CASE("help and usage exit codes") {
    TempDir dir;
    REQUIRE(run_cli("--help", dir.path()).exit_code == 0);
    REQUIRE(run_cli("multiply --help", dir.path()).exit_code == 0);
    REQUIRE(run_cli("", dir.path()).exit_code == 2);           // missing subcommand
    REQUIRE(run_cli("frobnicate", dir.path()).exit_code == 2);  // unknown subcommand
}

TEST_CASE("collinear fixture is reproduced exactly from one column") {
    TempDir dir;
    const fs::path a = dir.path() / "a.txt";
    const fs::path b = dir.path() / "b.txt";
    const fs::path out = dir.path() / "out.txt";
    write_file(a, kCollinearA);
    write_file(b, kCollinearB);

    const CliResult res = run_cli("multiply --a " + a.string() + " --b " + b.string() +
                                      " --k 1 --out " + out.string(),
                                  dir.path());
    REQUIRE(res.exit_code == 0);

    // The exact product, written through the same serializer.
    const amm::Matrix exact =
        amm::matmul(amm::read_matrix_file(a.string()), amm::read_matrix_file(b.string()));
    const fs::path expect = dir.path() / "expect.txt";
    amm::write_matrix_file(expect.string(), exact);
    REQUIRE(slurp(out) == slurp(expect));
}

TEST_CASE("full subset reproduces the product bytes on stdout") {
    TempDir dir;
    const fs::path a = dir.path() / "a.txt";
    const fs::path b = dir.path() / "b.txt";
    write_file(a, "2 3\n1 2 3\n4 5 6\n");
    write_file(b, "3 2\n7 8\n9 10\n11 12\n");

    const CliResult res = run_cli(
        "multiply --a " + a.string() + " --b " + b.string() + " --k 3", dir.path());
    REQUIRE(res.exit_code == 0);

    std::stringstream expected;
    amm::write_matrix(expected,
                      amm::matmul(amm::read_matrix_file(a.string()),
                                  amm::read_matrix_file(b.string())));
    REQUIRE(res.out == expected.str());
}

TEST_CASE("reported error lines match an offline recomputation") {
    TempDir dir;
    const fs::path a = dir.path() / "a.txt";
    const fs::path b = dir.path() / "b.txt";
    const fs::path out = dir.path() / "out.txt";

    amm::RngStream rng(555);
    const amm::Matrix am = test_support::gaussian(5, 6, rng);
    const amm::Matrix bm = test_support::gaussian(6, 4, rng);
    amm::write_matrix_file(a.string(), am);
    amm::write_matrix_file(b.string(), bm);

    const CliResult res = run_cli("multiply --a " + a.string() + " --b " + b.string() +
                                      " --k 3 --selection greedy --rescale optimal --seed 9" +
                                      " --out " + out.string() + " --report-error",
                                  dir.path());
    REQUIRE(res.exit_code == 0);

    std::map<std::string, double> reported;
    std::stringstream errs(res.err);
    std::string key, value;
    while (errs >> key >> value) reported[key] = std::stod(value);
    REQUIRE(reported.count("abs_error") == 1);
    REQUIRE(reported.count("rel_error_db") == 1);
    REQUIRE(reported.count("bound_trace") == 1);
    REQUIRE(reported.count("bound_worstcase") == 1);

    const amm::Matrix approx = amm::read_matrix_file(out.string());
    const double err = test_support::frob_distance(approx, amm::matmul(am, bm));
    REQUIRE_THAT(reported["abs_error"], WithinAbs(err, 1e-9 * (1.0 + err)));
    REQUIRE_THAT(reported["rel_error_db"],
                 WithinAbs(amm::relative_error_db(am, bm, approx), 1e-9));
    REQUIRE(reported["bound_worstcase"] >= err);
    REQUIRE(reported["bound_trace"] >= 0.0);
}

TEST_CASE("input failures exit with the usage code and a diagnostic") {
    TempDir dir;
    const fs::path a = dir.path() / "a.txt";
    const fs::path b = dir.path() / "b.txt";
    write_file(a, kCollinearA);
    write_file(b, kCollinearB);

    SECTION("unknown flag") {
        const CliResult res = run_cli("multiply --a " + a.string() + " --b " + b.string() +
                                          " --k 1 --frobnicate",
                                      dir.path());
        REQUIRE(res.exit_code == 2);
    }
    SECTION("missing file") {
        const CliResult res = run_cli(
            "multiply --a " + (dir.path() / "nope.txt").string() + " --b " + b.string() +
                " --k 1",
            dir.path());
        REQUIRE(res.exit_code == 2);
        REQUIRE_FALSE(res.err.empty());
    }
    SECTION("malformed matrix names the line") {
        const fs::path bad = dir.path() / "bad.txt";
        write_file(bad, "2 2\n1 2\n3 oops\n");
        const CliResult res =
            run_cli("multiply --a " + bad.string() + " --b " + b.string() + " --k 1",
                    dir.path());
        REQUIRE(res.exit_code == 2);
        REQUIRE(res.err.find("line 3") != std::string::npos);
    }
    SECTION("k out of range") {
        const CliResult res = run_cli(
            "multiply --a " + a.string() + " --b " + b.string() + " --k 5", dir.path());
        REQUIRE(res.exit_code == 2);
    }
    SECTION("mismatched shapes") {
        const fs::path wide = dir.path() / "wide.txt";
        write_file(wide, "3 2\n1 2\n3 4\n5 6\n");
        const CliResult res = run_cli(
            "multiply --a " + a.string() + " --b " + wide.string() + " --k 1", dir.path());
        REQUIRE(res.exit_code == 2);
    }
    SECTION("unknown selection token") {
        const CliResult res = run_cli("multiply --a " + a.string() + " --b " + b.string() +
                                          " --k 1 --selection volume",
                                      dir.path());
        REQUIRE(res.exit_code == 2);
    }
}

TEST_CASE("bench subcommand writes csv and a summary") {
    TempDir dir;
    const fs::path csv = dir.path() / "r.csv";

    SECTION("single-cell run produces one data row") {
        const CliResult res = run_cli(
            "bench --m 4 --n 3 --p 5 --matrices 1 --trials 1 --k-list 3 "
            "--methods greedy+optimal --seed 5 --out " + csv.string(),
            dir.path());
        REQUIRE(res.exit_code == 0);
        const std::string body = slurp(csv);
        REQUIRE(body.rfind("matrix_id,", 0) == 0);
        std::size_t lines = 0;
        for (char c : body) lines += c == '\n';
        REQUIRE(lines == 2);  // header + one record
        REQUIRE(res.out.find("selection") != std::string::npos);  // summary table present
    }
    SECTION("equal seeds replay byte-identically across thread counts") {
        const fs::path csv2 = dir.path() / "r2.csv";
        const std::string base =
            "bench --m 6 --n 5 --p 7 --matrices 2 --trials 2 --k-list 2,4 "
            "--methods greedy+optimal,power+optimal,jl --seed 42 --no-timing ";
        REQUIRE(run_cli(base + "--threads 1 --out " + csv.string(), dir.path()).exit_code == 0);
        REQUIRE(run_cli(base + "--threads 4 --out " + csv2.string(), dir.path()).exit_code == 0);
        REQUIRE(slurp(csv) == slurp(csv2));
    }
    SECTION("bad method token is a usage error") {
        const CliResult res = run_cli(
            "bench --m 4 --n 3 --p 5 --k-list 2 --methods banana --out " + csv.string(),
            dir.path());
        REQUIRE(res.exit_code == 2);
    }
    SECTION("k beyond n is a usage error") {
        const CliResult res = run_cli(
            "bench --m 4 --n 3 --p 5 --k-list 9 --methods greedy+optimal --out " +
                csv.string(),
            dir.path());
        REQUIRE(res.exit_code == 2);
    }
}

TEST_CASE("verify subcommand gates on the property suite") {
    TempDir dir;
    SECTION("clean run passes") {
        const CliResult res =
            run_cli("verify --n 5 --k 2 --instances 10 --seed 11", dir.path());
        REQUIRE(res.exit_code == 0);
        REQUIRE(res.out.find("PASS") != std::string::npos);
        REQUIRE(res.out.find("FAIL") == std::string::npos);
    }
    SECTION("edge configuration with k equal to n passes") {
        const CliResult res =
            run_cli("verify --n 3 --k 3 --instances 5 --seed 12", dir.path());
        REQUIRE(res.exit_code == 0);
    }
    SECTION("injected fault trips the suite") {
        const CliResult res = run_cli(
            "verify --n 5 --k 2 --instances 10 --seed 11 --inject-schur-fault", dir.path());
        REQUIRE(res.exit_code == 1);
        REQUIRE(res.out.find("FAIL") != std::string::npos);
        REQUIRE(res.out.find("failing instance seed") != std::string::npos);
    }
}
