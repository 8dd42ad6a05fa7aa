#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tpms {

enum class ErrorCode {
    BranchPoint,
    DegenerateFrame,
    DomainContainsBranchPoint,
    InvalidGrid,
    IndexOutOfRange,
    UnsupportedGridSize,
    InvalidDimensions,
    NonSquareSystem,
    SingularSystem,
    ParamOutOfRange,
    NoConvergence,
    DimensionMismatch,
    MissingSample,
    ParseError,
    IoError,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `code()` identifies the failure class;
/// `what()` carries "<Code>: <detail>".
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tpms
