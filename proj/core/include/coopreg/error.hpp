#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coopreg {

enum class ErrorCode {
    OverlappingGroups,
    UncoveredIndex,
    EmptyGroup,
    NonPositiveWeight,
    DimensionMismatch,
    InvalidArgument,
    NonBinaryResponse,
    NonFiniteLoss,
    LineSearchFailure,
    MaxIterationsExceeded,
    OlsUnavailable,
    DivisionGuard,
    FoldTooSmall,
    SingularSupportBlock,
    UnknownLevel,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Input and validation errors map to exit code 2 at the CLI, numerical
// failures to exit code 3.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace coopreg
