#pragma once

#include <stdexcept>
#include <string>

namespace zinn {

// Numeric values are part of the C ABI (zinn_status); append only.
enum class ErrorCode : int {
    InvalidArgument = 1,
    Io = 2,
    DegenerateColumn = 3,
    NegativeInput = 4,
    OutOfCoverage = 5,
    AllCellsDropped = 6,
    NoRegionCoverage = 7,
    DomainViolation = 8,
    MissingCpiMonth = 9,
    SchemaMismatch = 10,
    EmptyFile = 11,
    BadFractions = 12,
    UnknownSourceTag = 13,
    ShapeMismatch = 14,
    NonFiniteLoss = 15,
    RankDeficient = 16,
    RosterMismatch = 17,
    InvalidPolygon = 18,
    VersionMismatch = 19,
    CorruptBundle = 20,
    OneClassOnly = 21,
    ZeroVariance = 22,
    DivisionByZero = 23,
    NotFound = 24,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace zinn
