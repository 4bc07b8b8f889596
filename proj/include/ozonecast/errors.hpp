#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ozonecast {

// Base class for all toolkit errors. Commands map these to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- CSV ingestion ---
struct MalformedHeader : Error {
    using Error::Error;
};
struct UnparsableNumber : Error {
    UnparsableNumber(std::size_t row, const std::string& column)
        : Error("unparsable number at row " + std::to_string(row) + ", column '" + column + "'"),
          row(row),
          column(column) {}
    std::size_t row;
    std::string column;
};
struct EmptyFile : Error {
    using Error::Error;
};
struct UnknownClassLabel : Error {
    using Error::Error;
};

// --- feature table ---
struct ConstantColumn : Error {
    explicit ConstantColumn(const std::string& name)
        : Error("constant column '" + name + "'"), name(name) {}
    std::string name;
};
struct TooFewRows : Error {
    using Error::Error;
};
struct NoExceedances : Error {
    using Error::Error;
};
struct GroupTooSmall : Error {
    using Error::Error;
};

// --- linear algebra / model fitting ---
struct DimensionMismatch : Error {
    using Error::Error;
};
struct SingularDesign : Error {
    using Error::Error;
};
struct NonFiniteCost : Error {
    using Error::Error;
};
struct NonPositiveMse : Error {
    using Error::Error;
};
struct RankDeficient : Error {
    explicit RankDeficient(std::size_t effective_rank)
        : Error("rank deficient design, effective rank " + std::to_string(effective_rank)),
          effective_rank(effective_rank) {}
    std::size_t effective_rank;
};
struct DofExhausted : Error {
    using Error::Error;
};
struct OutOfDomain : Error {
    using Error::Error;
};

// --- classifier / logistic ---
struct MissingRegressionContext : Error {
    using Error::Error;
};
struct WrongOutputKind : Error {
    using Error::Error;
};
struct SingleClass : Error {
    using Error::Error;
};
struct PerfectSeparation : Error {
    using Error::Error;
};
struct NoConvergence : Error {
    explicit NoConvergence(int iterations)
        : Error("no convergence after " + std::to_string(iterations) + " iterations"),
          iterations(iterations) {}
    int iterations;
};

// --- metrics ---
struct LengthMismatch : Error {
    using Error::Error;
};
struct ConstantObservations : Error {
    using Error::Error;
};
struct NoObservedExceedances : Error {
    using Error::Error;
};
struct AllExceedances : Error {
    using Error::Error;
};
struct TooShort : Error {
    using Error::Error;
};

// --- CLI plumbing ---
struct ConfigError : Error {
    using Error::Error;
};
struct ArchiveConflict : Error {
    using Error::Error;
};

}  // namespace ozonecast
