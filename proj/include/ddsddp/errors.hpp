#pragma once

#include <stdexcept>
#include <string>

namespace ddsddp {

/// Inputs whose shapes do not agree (matrix vs vector lengths, stage widths).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Text input that cannot be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A modelling assumption was violated, e.g. an in-sample stage problem is
/// infeasible although relatively complete recourse was promised.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Oracle-only routines refuse instances beyond their enumeration limits.
class ScaleError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Numerical breakdown inside the LP solver (iteration limit, singular basis).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ddsddp
