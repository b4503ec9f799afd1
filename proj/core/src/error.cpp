#include <coopreg/error.hpp>

namespace coopreg {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
        case ErrorCode::OverlappingGroups: return "OverlappingGroups";
        case ErrorCode::UncoveredIndex: return "UncoveredIndex";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NonBinaryResponse: return "NonBinaryResponse";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::LineSearchFailure: return "LineSearchFailure";
        case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
        case ErrorCode::OlsUnavailable: return "OlsUnavailable";
        case ErrorCode::DivisionGuard: return "DivisionGuard";
        case ErrorCode::FoldTooSmall: return "FoldTooSmall";
        case ErrorCode::SingularSupportBlock: return "SingularSupportBlock";
        case ErrorCode::UnknownLevel: return "UnknownLevel";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept
{
    switch (code) {
        case ErrorCode::NonFiniteLoss:
        case ErrorCode::LineSearchFailure:
        case ErrorCode::MaxIterationsExceeded:
        case ErrorCode::DivisionGuard:
            return true;
        default:
            return false;
    }
}

} // namespace coopreg
