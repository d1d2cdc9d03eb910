#pragma once

#include <stdexcept>
#include <string>

namespace gazemetric {

// Error taxonomy mirrors the CLI exit codes: ConfigError -> 2,
// DataError -> 3, NumericError -> 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// -- ingest --
struct MissingColumn : DataError {
    explicit MissingColumn(const std::string& col)
        : DataError("missing column in header: " + col) {}
};
struct NonMonotoneTimestamps : DataError {
    explicit NonMonotoneTimestamps(const std::string& msg)
        : DataError("timestamps must strictly increase: " + msg) {}
};
struct EmptyRecording : DataError {
    explicit EmptyRecording(const std::string& msg)
        : DataError("empty recording: " + msg) {}
};

// -- event detection --
struct WindowTooLarge : ConfigError {
    explicit WindowTooLarge(const std::string& msg)
        : ConfigError("smoothing window too large: " + msg) {}
};

// -- features / model --
struct SchemaMismatch : DataError {
    explicit SchemaMismatch(const std::string& msg)
        : DataError("feature schema mismatch: " + msg) {}
};

// -- svm --
struct SingleClassInput : DataError {
    explicit SingleClassInput(const std::string& msg)
        : DataError("binary training needs both labels: " + msg) {}
};
struct NonFiniteFeature : DataError {
    explicit NonFiniteFeature(const std::string& msg)
        : DataError("non-finite feature value: " + msg) {}
};

// -- harness --
struct ClassMissing : DataError {
    explicit ClassMissing(const std::string& msg)
        : DataError("class has no rows: " + msg) {}
};
struct EmptyMatrix : DataError {
    explicit EmptyMatrix(const std::string& msg)
        : DataError("confusion matrix is empty: " + msg) {}
};
struct InconsistentSchema : DataError {
    explicit InconsistentSchema(const std::string& msg)
        : DataError("rankings disagree on the feature set: " + msg) {}
};

// -- synth --
struct BudgetInfeasible : ConfigError {
    explicit BudgetInfeasible(const std::string& msg)
        : ConfigError("amplitude budget unreachable in session duration: " + msg) {}
};

}  // namespace gazemetric
