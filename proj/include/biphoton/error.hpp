// error.hpp — error codes shared by every module, grouped by the CLI exit-code contract

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace biphoton {

enum class ErrorCode {
    // configuration / validation (exit 2)
    NonPositiveParameter,
    PumpTooSmall,
    InvalidConfig,
    ParseError,
    IoError,
    NyquistViolated,
    // engine (exit 3)
    OutOfGridBounds,
    NotFactorizable,
    GridTooNarrow,
    QuadratureUnderResolved,
    DelayOutsideTabulatedRange,
    AsymptoticPreconditionViolated,
    UnsupportedModel,
    TimeGridTooCoarse,
    TimeGridTooNarrow,
    AuditFailed,
    // reconstruction (exit 4)
    CarrierNotResolved,
    PacketsOverlap,
    AntisymmetricInput,
    IncompatibleGrids,
};

enum class ErrorCategory { Config, Engine, Reconstruction };

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category(ErrorCode code) noexcept;

// what() reads "<CodeName>: <detail>", e.g. "NonPositiveParameter: sigma_plus".
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return biphoton::category(code_); }

private:
    ErrorCode code_;
};

}  // namespace biphoton
