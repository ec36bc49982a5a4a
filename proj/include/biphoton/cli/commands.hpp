// commands.hpp — simulate / reconstruct / audit / presets entry points

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "biphoton/error.hpp"

namespace biphoton::cli {

// 0 ok, 2 config, 3 engine, 4 reconstruction, 1 anything unexpected.
int exit_code(ErrorCategory c) noexcept;

// args excludes the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// Tolerances enforced by `audit`.
inline constexpr double kDualDomainTolerance = 1e-5;
inline constexpr double kAuditTermTolerance = 1e-6;
inline constexpr double kAuditResidualTolerance = 1e-10;
inline constexpr double kHomDipTolerance = 1e-9;
inline constexpr double kHomPeakTolerance = 1e-6;
inline constexpr double kNoonPeriodTolerance = 1e-3;
inline constexpr std::size_t kMaxAuditPairs = 49;

}  // namespace biphoton::cli
