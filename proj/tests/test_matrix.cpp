#include <cmath>
#include <sstream>

#include "catch2/catch_amalgamated.hpp"
#include "test_support.hpp"

using amm::Matrix;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("matrix construction and access") {
    Matrix m(2, 3);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j) REQUIRE(m(i, j) == 0.0);

    Matrix lit{{1, 2}, {3, 4}};
    REQUIRE(lit(0, 0) == 1.0);
    REQUIRE(lit(1, 1) == 4.0);
    REQUIRE_THROWS_AS((Matrix{{1, 2}, {3}}), amm::ShapeError);

    Matrix empty(0, 0);
    REQUIRE(empty.rows() == 0);
    REQUIRE(amm::frobenius_norm(empty) == 0.0);
}

TEST_CASE("identity product leaves the operand unchanged") {
    amm::RngStream rng(11);
    const Matrix m = test_support::gaussian(3, 4, rng);
    const Matrix i3 = Matrix::identity(3);
    REQUIRE(amm::matmul(i3, m) == m);
}

TEST_CASE("hand-checkable 2x2 product") {
    const Matrix a{{1, 2}, {3, 4}};
    const Matrix b{{0}, {1}};
    const Matrix expect{{2}, {4}};
    REQUIRE(amm::matmul(a, b) == expect);
}

TEST_CASE("product matches naive triple-loop oracle") {
    amm::RngStream rng(7);
    const Matrix a = test_support::gaussian(7, 5, rng);
    const Matrix b = test_support::gaussian(5, 3, rng);
    const Matrix fast = amm::matmul(a, b);
    const Matrix slow = test_support::naive_matmul(a, b);
    const double scale = amm::frobenius_norm(slow);
    REQUIRE(test_support::frob_distance(fast, slow) <= 1e-12 * scale);
}

TEST_CASE("product rejects mismatched inner dimensions") {
    REQUIRE_THROWS_AS(amm::matmul(Matrix(2, 3), Matrix(4, 2)), amm::ShapeError);
}

TEST_CASE("frobenius norm on hand values") {
    REQUIRE(amm::frobenius_norm(Matrix(3, 5)) == 0.0);
    REQUIRE_THAT(amm::frobenius_norm(Matrix::identity(4)), WithinAbs(2.0, 1e-15));
    REQUIRE_THAT(amm::frobenius_norm(Matrix{{3, 4}}), WithinAbs(5.0, 1e-15));
}

TEST_CASE("gram of orthonormal columns is the identity") {
    // Householder reflector: exactly orthogonal columns.
    const double s = 1.0 / std::sqrt(2.0);
    const Matrix q{{s, s}, {s, -s}};
    const Matrix g = amm::gram(q);
    REQUIRE_THAT(g(0, 0), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(g(1, 1), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(g(0, 1), WithinAbs(0.0, 1e-15));
}

TEST_CASE("gram of a single column is its squared norm") {
    const Matrix a{{1}, {2}};
    const Matrix g = amm::gram(a);
    REQUIRE(g.rows() == 1);
    REQUIRE(g(0, 0) == 5.0);
}

TEST_CASE("gram is symmetric positive semi-definite") {
    amm::RngStream rng(23);
    const Matrix a = test_support::gaussian(6, 4, rng);
    const Matrix g = amm::gram(a);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < i; ++j) REQUIRE(g(i, j) == g(j, i));
    const amm::SymEigen eig = amm::sym_eigen(g);
    for (double lam : eig.eigenvalues) REQUIRE(lam >= -1e-12 * std::abs(eig.eigenvalues[0]));
}

TEST_CASE("gram of rows equals gram of the transpose") {
    amm::RngStream rng(29);
    const Matrix b = test_support::gaussian(4, 6, rng);
    REQUIRE(amm::gram_rows(b) == amm::gram(amm::transpose(b)));
}

TEST_CASE("entrywise product on hand values") {
    amm::RngStream rng(31);
    const Matrix m = test_support::gaussian(3, 2, rng);
    Matrix ones(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) ones(i, j) = 1.0;
    REQUIRE(amm::hadamard(m, ones) == m);
    REQUIRE(amm::hadamard(m, Matrix(3, 2)) == Matrix(3, 2));

    const Matrix left{{1, 2}, {3, 4}};
    const Matrix right{{5, 6}, {7, 8}};
    const Matrix expect{{5, 12}, {21, 32}};
    REQUIRE(amm::hadamard(left, right) == expect);
    REQUIRE_THROWS_AS(amm::hadamard(left, Matrix(2, 3)), amm::ShapeError);
}

TEST_CASE("sums, traces, and extrema helpers") {
    const Matrix m{{1, -2}, {3, 4}};
    REQUIRE(amm::trace(m) == 5.0);
    REQUIRE(amm::sum_entries(m) == 6.0);
    REQUIRE(amm::max_abs(m) == 4.0);
    REQUIRE(amm::column_dot(m, 0, 1) == 1.0 * -2.0 + 3.0 * 4.0);
    REQUIRE(amm::row_dot(m, 0, 1) == 1.0 * 3.0 + -2.0 * 4.0);
    const auto cn = amm::column_squared_norms(m);
    REQUIRE(cn[0] == 10.0);
    REQUIRE(cn[1] == 20.0);
    const auto rn = amm::row_squared_norms(m);
    REQUIRE(rn[0] == 5.0);
    REQUIRE(rn[1] == 25.0);
}

TEST_CASE("non-finite entries are rejected at construction") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS((Matrix{{1.0, nan}}), amm::NumericError);
    Matrix m{{1.0, 2.0}};
    m(0, 1) = nan;
    REQUIRE_FALSE(m.all_finite());
}

TEST_CASE("double formatting round-trips and names specials") {
    REQUIRE(amm::format_double(0.0) == "0");
    REQUIRE(amm::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    REQUIRE(amm::format_double(std::numeric_limits<double>::infinity()) == "inf");
    REQUIRE(amm::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    for (double v : {1.0 / 3.0, 2.5e-10, 1e100, -0.0, 123456.789}) {
        const std::string s = amm::format_double(v);
        REQUIRE(std::stod(s) == v);
    }
}

TEST_CASE("matrix text io round-trips bitwise") {
    amm::RngStream rng(37);
    Matrix m = test_support::gaussian(4, 3, rng);
    m(0, 0) = 1.0 / 3.0;
    m(1, 2) = 1e-300;
    std::stringstream ss;
    amm::write_matrix(ss, m);
    const Matrix back = amm::read_matrix(ss);
    REQUIRE(back == m);
}

TEST_CASE("matrix reader reports the offending line") {
    SECTION("bad header") {
        std::stringstream ss("2 banana\n1 2\n3 4\n");
        try {
            amm::read_matrix(ss);
            FAIL("expected a parse error");
        } catch (const amm::ParseError& e) {
            REQUIRE(e.line() == 1);
        }
    }
    SECTION("short row") {
        std::stringstream ss("2 2\n1 2\n3\n");
        try {
            amm::read_matrix(ss);
            FAIL("expected a parse error");
        } catch (const amm::ParseError& e) {
            REQUIRE(e.line() == 3);
        }
    }
    SECTION("non-numeric entry") {
        std::stringstream ss("1 2\n1 x\n");
        REQUIRE_THROWS_AS(amm::read_matrix(ss), amm::ParseError);
    }
    SECTION("non-finite entry") {
        std::stringstream ss("1 1\nnan\n");
        REQUIRE_THROWS_AS(amm::read_matrix(ss), amm::ParseError);
    }
}

TEST_CASE("seed derivation is order-sensitive and stable") {
    const auto s1 = amm::derive_seed(1, amm::tag_field("cell"), 2, 3);
    const auto s2 = amm::derive_seed(1, amm::tag_field("cell"), 3, 2);
    REQUIRE(s1 != s2);
    REQUIRE(s1 == amm::derive_seed(1, amm::tag_field("cell"), 2, 3));
    REQUIRE(amm::tag_field("greedy") != amm::tag_field("uniform"));
}

TEST_CASE("rng streams are reproducible and splittable") {
    amm::RngStream a(99);
    amm::RngStream b(99);
    for (int i = 0; i < 16; ++i) REQUIRE(a.next_u64() == b.next_u64());
    amm::RngStream c(99);
    amm::RngStream child = c.split(7);
    amm::RngStream child2 = amm::RngStream(99).split(7);
    REQUIRE(child.next_u64() == child2.next_u64());
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal samples have sane first moments") {
    amm::RngStream rng(5);
    double sum = 0.0, sumsq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    REQUIRE_THAT(sum / n, WithinAbs(0.0, 0.03));
    REQUIRE_THAT(sumsq / n, WithinAbs(1.0, 0.05));
}
