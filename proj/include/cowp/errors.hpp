#pragma once

#include <stdexcept>
#include <string>

namespace cowp {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed PDDL text. Carries a 1-based source position.
struct SyntaxError : Error {
    SyntaxError(const std::string& msg, int line, int column)
        : Error(msg + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line(line), column(column) {}
    int line;
    int column;
};

/// Well-formed text that violates a domain/problem rule (undeclared type,
/// arity mismatch, unbound variable, unsupported feature...).
struct SemanticError : Error {
    using Error::Error;
};

struct NonGroundError : Error {
    using Error::Error;
};

struct PreconditionViolation : Error {
    using Error::Error;
};

struct CapacityError : Error {
    using Error::Error;
};

struct UnknownAction : Error {
    using Error::Error;
};

struct UnknownType : Error {
    using Error::Error;
};

struct UnknownPredicate : Error {
    using Error::Error;
};

struct ArityMismatch : Error {
    using Error::Error;
};

struct UnboundVariable : Error {
    using Error::Error;
};

struct MissingPattern : Error {
    using Error::Error;
};

struct EmptyField : Error {
    using Error::Error;
};

struct TooFewObjects : Error {
    using Error::Error;
};

struct UnmappableSituation : Error {
    using Error::Error;
};

struct TransportError : Error {
    using Error::Error;
};

struct AuthError : Error {
    using Error::Error;
};

struct FormatError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace cowp
