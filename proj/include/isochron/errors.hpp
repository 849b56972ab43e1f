#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace isochron {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivisionByZeroError : Error {
    DivisionByZeroError() : Error("division by zero") {}
};

struct RingMismatchError : Error {
    RingMismatchError(const std::string& what) : Error("ring mismatch: " + what) {}
};

struct ParseError : Error {
    std::string msg;
    std::size_t line, column;
    ParseError(const std::string& msg_, std::size_t ln, std::size_t col)
        : Error("parse error at " + std::to_string(ln) + ":" + std::to_string(col) + ": " + msg_),
          msg(msg_), line(ln), column(col) {}
};

struct ExponentOverflowError : Error {
    ExponentOverflowError() : Error("monomial exponent exceeds 32-bit range") {}
};

// Hitting the configured S-pair or size budget is a reported outcome, not a bug.
struct ResourceLimitError : Error {
    std::uint64_t spent;
    ResourceLimitError(const std::string& what, std::uint64_t n)
        : Error("resource limit exceeded: " + what + " (" + std::to_string(n) + ")"), spent(n) {}
};

struct BadPrimeError : Error {
    BadPrimeError(const std::string& what) : Error("bad prime: " + what) {}
};

struct ReconstructionError : Error {
    ReconstructionError(const std::string& what)
        : Error("rational reconstruction failed: " + what) {}
};

struct DegeneracyError : Error {
    DegeneracyError(const std::string& what) : Error("degenerate input: " + what) {}
};

// Raised by the series builder when a resonant obstruction is nonzero.
struct ObstructionError : Error {
    unsigned k;
    char which;  // 'I' or 'J'
    ObstructionError(unsigned k_, char which_, const std::string& value)
        : Error("nonzero obstruction " + std::string(1, which_) + "_" + std::to_string(k_) +
                " = " + value),
          k(k_), which(which_) {}
};

struct NotExactError : Error {
    NotExactError(const std::string& what) : Error("not exactly representable: " + what) {}
};

struct NoReturnError : Error {
    NoReturnError(const std::string& what) : Error("no section return: " + what) {}
};

struct BlowUpError : Error {
    BlowUpError(const std::string& what) : Error("trajectory escape: " + what) {}
};

}  // namespace isochron
