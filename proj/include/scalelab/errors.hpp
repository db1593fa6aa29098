#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scalelab {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, invalid arguments, violated preconditions.
/// The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

/// The data is well-formed but the computation cannot proceed
/// (singular designs, degenerate residuals). CLI exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

// ---- input errors ----------------------------------------------------------

class DimensionMismatch : public InputError {
public:
    using InputError::InputError;
};

class InvalidParameter : public InputError {
public:
    using InputError::InputError;
};

class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& reason)
        : InputError("parse error at line " + std::to_string(line) + ": " + reason),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public InputError {
public:
    using InputError::InputError;
};

class ValueError : public InputError {
public:
    using InputError::InputError;
};

class MissingField : public InputError {
public:
    using InputError::InputError;
};

class EmptyInput : public InputError {
public:
    using InputError::InputError;
};

class InvalidColumn : public InputError {
public:
    using InputError::InputError;
};

class InvalidRange : public InputError {
public:
    using InputError::InputError;
};

class InsufficientPoints : public InputError {
public:
    using InputError::InputError;
};

class NonPositiveValue : public InputError {
public:
    using InputError::InputError;
};

class SampleTooSmall : public InputError {
public:
    using InputError::InputError;
};

// ---- numerical errors ------------------------------------------------------

class RankDeficient : public NumericalError {
public:
    RankDeficient(std::size_t rank, std::size_t cols)
        : NumericalError("rank deficient design: rank " + std::to_string(rank) + " < " +
                         std::to_string(cols) + " columns"),
          rank_(rank) {}
    std::size_t rank() const noexcept { return rank_; }

private:
    std::size_t rank_;
};

class SingularMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateVariance : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ZeroVariance : public NumericalError {
public:
    explicit ZeroVariance(const std::string& column)
        : NumericalError("zero variance in column '" + column + "'"), column_(column) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

class DegenerateResiduals : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CollinearAugmentation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class TooFewValidResamples : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientFrontier : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace scalelab
