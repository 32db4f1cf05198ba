#pragma once

#include <stdexcept>
#include <string>

namespace coderag {

/// Base class for all engine errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration values (bad window/overlap, k out of range, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Violated mathematical preconditions (dimension mismatch, zero vector).
struct DomainError : Error {
    using Error::Error;
};

/// Fatal ingestion failures (missing or unreadable root).
struct IngestError : Error {
    using Error::Error;
};

/// Embedding provider failures (network, contract violations).
struct ProviderError : Error {
    using Error::Error;
};

/// Snapshot persistence failures; message names the failing check.
struct SnapshotError : Error {
    using Error::Error;
};

/// Evaluation harness failures (bad dataset, missing transcript).
struct EvalError : Error {
    using Error::Error;
};

} // namespace coderag
