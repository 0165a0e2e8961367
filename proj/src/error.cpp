#include "error.hpp"

namespace zinn {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
        case ErrorCode::DegenerateColumn: return "DegenerateColumn";
        case ErrorCode::NegativeInput: return "NegativeInput";
        case ErrorCode::OutOfCoverage: return "OutOfCoverage";
        case ErrorCode::AllCellsDropped: return "AllCellsDropped";
        case ErrorCode::NoRegionCoverage: return "NoRegionCoverage";
        case ErrorCode::DomainViolation: return "DomainViolation";
        case ErrorCode::MissingCpiMonth: return "MissingCpiMonth";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::BadFractions: return "BadFractions";
        case ErrorCode::UnknownSourceTag: return "UnknownSourceTag";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::RosterMismatch: return "RosterMismatch";
        case ErrorCode::InvalidPolygon: return "InvalidPolygon";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::CorruptBundle: return "CorruptBundle";
        case ErrorCode::OneClassOnly: return "OneClassOnly";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::DivisionByZero: return "DivisionByZero";
        case ErrorCode::NotFound: return "NotFound";
    }
    return "Unknown";
}

}  // namespace zinn
