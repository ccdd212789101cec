//
// io.hpp - matrix text format and round-trip-exact number formatting
//
// Format: first line "rows cols", then rows lines of cols space-separated
// decimal numbers. Values are written with 17 significant digits, which
// round-trips every finite double exactly through strtod.
//

#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "amm/errors.hpp"
#include "amm/matrix.hpp"

namespace amm {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline double parse_double_token(const std::string& token, std::size_t line) {
    errno = 0;
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw ParseError(line, "expected a number, got '" + token + "'");
    if (errno == ERANGE && std::isinf(v))
        throw ParseError(line, "number out of range: '" + token + "'");
    return v;
}

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(std::move(tok));
    return out;
}

}  // namespace detail

inline Matrix read_matrix(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;

    // header: "rows cols"
    if (!std::getline(in, line)) throw ParseError(1, "empty input, expected 'rows cols'");
    ++lineno;
    auto header = detail::split_tokens(line);
    if (header.size() != 2)
        throw ParseError(lineno, "expected 'rows cols' header");
    long rows = 0, cols = 0;
    try {
        rows = std::stol(header[0]);
        cols = std::stol(header[1]);
    } catch (const std::exception&) {
        throw ParseError(lineno, "expected integer dimensions");
    }
    if (rows <= 0 || cols <= 0)
        throw ParseError(lineno, "dimensions must be positive");

    std::vector<double> entries;
    entries.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (long r = 0; r < rows; ++r) {
        if (!std::getline(in, line))
            throw ParseError(lineno + 1, "unexpected end of input, expected " +
                                             std::to_string(rows) + " data rows");
        ++lineno;
        auto toks = detail::split_tokens(line);
        if (toks.size() != static_cast<std::size_t>(cols))
            throw ParseError(lineno, "expected " + std::to_string(cols) + " values, got " +
                                         std::to_string(toks.size()));
        for (const auto& t : toks) {
            const double v = detail::parse_double_token(t, lineno);
            if (!std::isfinite(v))
                throw ParseError(lineno, "non-finite entry '" + t + "'");
            entries.push_back(v);
        }
    }
    return Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                  std::move(entries));
}

inline Matrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open matrix file: " + path);
    return read_matrix(in);
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
    out << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

inline void write_matrix_file(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    write_matrix(out, m);
}

}  // namespace amm
