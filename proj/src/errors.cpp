#include "procex/errors.hpp"

namespace procex {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::SyntaxError: return "SyntaxError";
        case ErrorKind::DuplicateName: return "DuplicateName";
        case ErrorKind::InvalidName: return "InvalidName";
        case ErrorKind::BadBounds: return "BadBounds";
        case ErrorKind::UnknownTarget: return "UnknownTarget";
        case ErrorKind::UnknownAttribute: return "UnknownAttribute";
        case ErrorKind::BadProbability: return "BadProbability";
        case ErrorKind::BadProbabilitySum: return "BadProbabilitySum";
        case ErrorKind::CyclicGraph: return "CyclicGraph";
        case ErrorKind::UnreachableNode: return "UnreachableNode";
        case ErrorKind::NoEndNode: return "NoEndNode";
        case ErrorKind::MissingAttribute: return "MissingAttribute";
        case ErrorKind::SchemaMismatch: return "SchemaMismatch";
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::UnparsableNumber: return "UnparsableNumber";
        case ErrorKind::BadLabel: return "BadLabel";
        case ErrorKind::EmptyLog: return "EmptyLog";
        case ErrorKind::DuplicateCaseId: return "DuplicateCaseId";
        case ErrorKind::SingleClassLog: return "SingleClassLog";
        case ErrorKind::Diverged: return "Diverged";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::InsufficientSamples: return "InsufficientSamples";
        case ErrorKind::RejectionBudgetExhausted: return "RejectionBudgetExhausted";
        case ErrorKind::NonConformantInstance: return "NonConformantInstance";
        case ErrorKind::EmptySamples: return "EmptySamples";
        case ErrorKind::NoMatchingInstances: return "NoMatchingInstances";
        case ErrorKind::UnknownFeature: return "UnknownFeature";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::FormatError: return "FormatError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

SyntaxError::SyntaxError(std::size_t line, std::size_t col, std::string expected,
                         const std::string& found)
    : Error(ErrorKind::SyntaxError, "line " + std::to_string(line) + ", col " +
                                        std::to_string(col) + ": expected " + expected +
                                        ", found " + found),
      line_(line),
      col_(col),
      expected_(std::move(expected)) {}

}  // namespace procex
