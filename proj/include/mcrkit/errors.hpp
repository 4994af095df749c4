#pragma once

#include <stdexcept>
#include <string>

namespace mcrkit {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- data errors ---
struct MissingColumn : Error { using Error::Error; };
struct NonNumericCell : Error { using Error::Error; };
struct EmptyFile : Error { using Error::Error; };
struct InvalidSplitSize : Error { using Error::Error; };
struct NoX2Columns : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct DegenerateData : Error { using Error::Error; };

// --- estimator errors ---
struct TooLargeForOracle : Error { using Error::Error; };
struct ZeroDenominator : Error { using Error::Error; };
struct PairExpansionTooLarge : Error { using Error::Error; };

// --- solver errors ---
struct SingularConstraint : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct UnboundedCombination : Error { using Error::Error; };
struct InfeasibleEpsilon : Error { using Error::Error; };
struct AllProbesUnbounded : Error { using Error::Error; };

// --- inference / bounds errors ---
struct TooManyInfeasibleReplicates : Error { using Error::Error; };
struct NonOptimizableDescriptor : Error { using Error::Error; };
struct InvalidConstants : Error { using Error::Error; };

// --- cli errors ---
struct ConfigError : Error { using Error::Error; };

} // namespace mcrkit
