#ifndef GAMR_ERRORS_HPP
#define GAMR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gamr {

// Shape or size disagreement between tensors handed to an operation.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Violated call contract (non-scalar backward root, empty vector, NaN input ...).
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Bad user-facing configuration (config file values, infeasible mask budget ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally incompatible parameter sets during aggregation.
struct AggregationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Checkpoint container problems, split by failure mode so tests and callers
// can tell a wrong file from a damaged one.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VersionError : FormatError {
    using FormatError::FormatError;
};
struct CorruptionError : FormatError {
    using FormatError::FormatError;
};

} // namespace gamr

#endif
