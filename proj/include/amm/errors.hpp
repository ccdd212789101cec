//
// errors.hpp - exception types shared across the library
//

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace amm {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Dimension mismatch between operands (or non-square where square is required).
class ShapeError : public Error {
public:
    using Error::Error;
};

// An index outside [0, n).
class IndexError : public Error {
public:
    using Error::Error;
};

// Subset cardinality k outside the valid range.
class CardinalityError : public Error {
public:
    using Error::Error;
};

// Input required to be positive semi-definite is not.
class NotPsdError : public Error {
public:
    using Error::Error;
};

// Linear system is singular or numerically near-singular.
class SingularSystemError : public Error {
public:
    SingularSystemError(const std::string& what, double pivot)
        : Error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}

    double pivot() const noexcept { return pivot_; }

private:
    double pivot_ = 0.0;
};

// Sampling weights cannot support the requested draw (e.g. fewer than k
// positive weights).
class DegenerateWeightsError : public Error {
public:
    using Error::Error;
};

// Every k-minor of the kernel has zero determinant.
class DegenerateKernelError : public Error {
public:
    using Error::Error;
};

// binomial(n, k) exceeds the exact-enumeration cap; use the MH sampler.
class EnumerationTooLargeError : public Error {
public:
    using Error::Error;
};

// Invalid experiment configuration, rejected before any work.
class ConfigError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

// Ill-formed text input; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

// A computation produced a non-finite value it promised not to.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace amm
