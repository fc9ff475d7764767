#pragma once

#include <stdexcept>
#include <string>

namespace mirrorscan {

// Every failure raised by the library derives from Error so callers (the CLI in
// particular) can map families of failures onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input could not be read or validated.
class InputError : public Error {
public:
    using Error::Error;
};

// A numerical routine could not produce a trustworthy value.
class NumericError : public Error {
public:
    using Error::Error;
};

// Post-processing found nothing meaningful to report (no fringes, ...).
class AnalysisError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::size_t line)
        : InputError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    explicit ParseError(const std::string& what) : ParseError(what, 0) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public InputError {
public:
    using InputError::InputError;
};

class OutOfRange : public InputError {
public:
    using InputError::InputError;
};

class GridMismatch : public InputError {
public:
    using InputError::InputError;
};

class CoverageError : public InputError {
public:
    using InputError::InputError;
};

class ZeroSpectrum : public InputError {
public:
    using InputError::InputError;
};

class ZeroReference : public InputError {
public:
    using InputError::InputError;
};

class EmptyAxisList : public InputError {
public:
    using InputError::InputError;
};

class ColumnTooShort : public InputError {
public:
    using InputError::InputError;
};

class DegenerateInterface : public NumericError {
public:
    using NumericError::NumericError;
};

class QuadratureFailure : public NumericError {
public:
    using NumericError::NumericError;
};

class DivisionDegenerate : public NumericError {
public:
    using NumericError::NumericError;
};

// Numeric failure inside one cell of a (d, lambda) sweep.
class CellFailure : public NumericError {
public:
    CellFailure(double d_nm, double lambda_nm, const std::string& what)
        : NumericError("cell (d=" + format_nm(d_nm) + " nm, lambda=" + format_nm(lambda_nm) +
                       " nm): " + what),
          d_nm_(d_nm),
          lambda_nm_(lambda_nm) {}

    [[nodiscard]] double d_nm() const noexcept { return d_nm_; }
    [[nodiscard]] double lambda_nm() const noexcept { return lambda_nm_; }

private:
    static std::string format_nm(double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    double d_nm_;
    double lambda_nm_;
};

class NoFringes : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

}  // namespace mirrorscan
