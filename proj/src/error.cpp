#include "tpms/error.hpp"

namespace tpms {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::BranchPoint: return "BranchPoint";
    case ErrorCode::DegenerateFrame: return "DegenerateFrame";
    case ErrorCode::DomainContainsBranchPoint: return "DomainContainsBranchPoint";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnsupportedGridSize: return "UnsupportedGridSize";
    case ErrorCode::InvalidDimensions: return "InvalidDimensions";
    case ErrorCode::NonSquareSystem: return "NonSquareSystem";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingSample: return "MissingSample";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code)
{
}

}  // namespace tpms
