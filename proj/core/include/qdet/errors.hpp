#pragma once

#include <stdexcept>
#include <string>

namespace qdet {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed textual input (expression JSON, flowchart JSON, determinant files,
/// statement grammar).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structurally valid input that violates a domain rule (kind mismatches,
/// unknown operators, comparisons without common parameters, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Raised while evaluating expressions or running flowcharts.
class EvalError : public Error {
public:
    using Error::Error;
};

class DivisionByZero : public EvalError {
public:
    explicit DivisionByZero(const std::string& where)
        : EvalError("division by zero in " + where) {}
};

class UnboundVariable : public EvalError {
public:
    explicit UnboundVariable(const std::string& name)
        : EvalError("unbound variable '" + name + "'") {}
};

/// Builder/evaluator safety valves (step and branch budgets).
class LimitExceeded : public Error {
public:
    using Error::Error;
};

/// Comparison over characteristic sets with no shared parameter point.
class NoCommonParameters : public DomainError {
public:
    NoCommonParameters()
        : DomainError("comparison is not possible: "
                      "no common parameter values") {}
};

/// Catalog lookups and insertions.
class NotFound : public DomainError {
public:
    explicit NotFound(const std::string& id)
        : DomainError("no record with id '" + id + "'") {}
};

class DuplicateId : public DomainError {
public:
    explicit DuplicateId(const std::string& id)
        : DomainError("a record with id '" + id + "' already exists") {}
};

/// Filesystem / store problems.
class IoError : public Error {
public:
    using Error::Error;
};

class StoreCorrupt : public IoError {
public:
    StoreCorrupt(const std::string& path, const std::string& reason)
        : IoError("store corrupt at " + path + ": " + reason) {}
};

} // namespace qdet
