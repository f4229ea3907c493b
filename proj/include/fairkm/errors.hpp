#pragma once

#include <stdexcept>
#include <string>

namespace fairkm {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Inputs disagree on shape (row counts, dimensions, index ranges).
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A reassignment that would leave a cluster empty, or an otherwise
/// inconsistent move request.
class RejectedMoveError : public Error {
public:
    using Error::Error;
};

/// Centroid initialization cannot satisfy its contract (e.g. k exceeds the
/// number of distinct rows).
class InitError : public Error {
public:
    using Error::Error;
};

/// A structural invariant was violated (e.g. an empty cluster where none is
/// allowed).
class InvariantError : public Error {
public:
    using Error::Error;
};

/// A schema references a column the file does not have, or is malformed.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Preprocessing cannot proceed (unparseable value, zero-variance column).
class PreprocessError : public Error {
public:
    using Error::Error;
};

/// The sensitive column has fewer than two observed groups.
class DegenerateGroupError : public PreprocessError {
public:
    using PreprocessError::PreprocessError;
};

/// The contrastive stopping rule hit a non-positive objective baseline.
class StoppingRuleError : public Error {
public:
    using Error::Error;
};

/// An evaluation metric is undefined for the given state.
class MetricError : public Error {
public:
    using Error::Error;
};

/// A caller-supplied argument is out of range.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A file could not be opened or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fairkm
