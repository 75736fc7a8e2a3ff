#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace procex {

enum class ErrorKind {
    SyntaxError,
    DuplicateName,
    InvalidName,
    BadBounds,
    UnknownTarget,
    UnknownAttribute,
    BadProbability,
    BadProbabilitySum,
    CyclicGraph,
    UnreachableNode,
    NoEndNode,
    MissingAttribute,
    SchemaMismatch,
    MissingColumn,
    UnparsableNumber,
    BadLabel,
    EmptyLog,
    DuplicateCaseId,
    SingleClassLog,
    Diverged,
    SingularSystem,
    InsufficientSamples,
    RejectionBudgetExhausted,
    NonConformantInstance,
    EmptySamples,
    NoMatchingInstances,
    UnknownFeature,
    InvalidArgument,
    IoError,
    FormatError,
};

std::string_view to_string(ErrorKind kind);

/// Domain error carrying a machine-readable kind. The CLI prints `name()`.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return to_string(kind_); }

private:
    ErrorKind kind_;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, std::size_t col, std::string expected, const std::string& found);

    std::size_t line() const noexcept { return line_; }
    std::size_t col() const noexcept { return col_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t line_;
    std::size_t col_;
    std::string expected_;
};

}  // namespace procex
