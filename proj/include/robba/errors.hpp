#pragma once

#include <stdexcept>
#include <string>

namespace robba {

enum class ErrorKind {
    // precision family (exit code 1)
    DivisionByZeroAtPrecision,
    PrecisionExhausted,
    WindowOverflow,
    LogDivergent,
    IllConditioned,
    SingularAtPrecision,
    // invalid input family (exit code 2)
    InvalidInput,
    ZeroInput,
    NotComposable,
    NotDivisible,
    NotEtale,
    PositiveWeights,
    SchemaMismatch,
    // verification family (exit code 3)
    ValidationFailure,
    MismatchedTwist,
    StabilityFailure,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind, which fixes the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept;

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what)
{
    if (!cond) fail(kind, what);
}

} // namespace robba
