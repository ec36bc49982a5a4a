// interferogram_io.hpp — CSV + JSON sidecar persistence for interferograms

#pragma once

#include <optional>
#include <string>

#include "biphoton/freq_engine.hpp"
#include "biphoton/spectroscopy.hpp"
#include "json.hpp"

namespace biphoton::cli {

inline constexpr int kSidecarSchema = 1;

// Delays go to disk in the caller's units (working delay / frequency_scale).
// Files: <prefix>.csv (tau1,tau2,rate) and <prefix>.json.
void write_interferogram(const Interferogram& ig, const std::string& prefix, const nlohmann::json& config_echo,
                         const std::string& preset);

// Reads <prefix>.csv / <prefix>.json (either path may be given with its extension).
// Returns delays in working units. Truncation or schema mismatch → ParseError.
Interferogram read_interferogram(const std::string& path);

// Envelope pair at most max_rows rows, delays in caller units.
void write_envelopes(const EnvelopePair& env, double frequency_scale, const std::string& path,
                     std::size_t max_rows = 2048);

std::string strip_extension(const std::string& path);

}  // namespace biphoton::cli
