#include "biphoton/error.hpp"

namespace biphoton {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
        case ErrorCode::PumpTooSmall: return "PumpTooSmall";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::NyquistViolated: return "NyquistViolated";
        case ErrorCode::OutOfGridBounds: return "OutOfGridBounds";
        case ErrorCode::NotFactorizable: return "NotFactorizable";
        case ErrorCode::GridTooNarrow: return "GridTooNarrow";
        case ErrorCode::QuadratureUnderResolved: return "QuadratureUnderResolved";
        case ErrorCode::DelayOutsideTabulatedRange: return "DelayOutsideTabulatedRange";
        case ErrorCode::AsymptoticPreconditionViolated: return "AsymptoticPreconditionViolated";
        case ErrorCode::UnsupportedModel: return "UnsupportedModel";
        case ErrorCode::TimeGridTooCoarse: return "TimeGridTooCoarse";
        case ErrorCode::TimeGridTooNarrow: return "TimeGridTooNarrow";
        case ErrorCode::AuditFailed: return "AuditFailed";
        case ErrorCode::CarrierNotResolved: return "CarrierNotResolved";
        case ErrorCode::PacketsOverlap: return "PacketsOverlap";
        case ErrorCode::AntisymmetricInput: return "AntisymmetricInput";
        case ErrorCode::IncompatibleGrids: return "IncompatibleGrids";
    }
    return "Unknown";
}

ErrorCategory category(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonPositiveParameter:
        case ErrorCode::PumpTooSmall:
        case ErrorCode::InvalidConfig:
        case ErrorCode::ParseError:
        case ErrorCode::IoError:
        case ErrorCode::NyquistViolated:
            return ErrorCategory::Config;
        case ErrorCode::CarrierNotResolved:
        case ErrorCode::PacketsOverlap:
        case ErrorCode::AntisymmetricInput:
        case ErrorCode::IncompatibleGrids:
            return ErrorCategory::Reconstruction;
        default:
            return ErrorCategory::Engine;
    }
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace biphoton
