// config.hpp — JSON scan configuration and the built-in presets

#pragma once

#include <string>
#include <vector>

#include "biphoton/scan.hpp"
#include "json.hpp"

namespace biphoton::cli {

using json = nlohmann::json;

// Unknown keys are rejected; missing keys keep their defaults.
ScanConfig parse_config(const json& doc);
ScanConfig load_config(const std::string& path);
json config_to_json(const ScanConfig& c);

struct PresetMember {
    std::string label;  // file-name suffix within a family, empty for single presets
    ScanConfig config;
};

struct Preset {
    std::string name;
    std::string description;
    bool family{false};  // envelope family: envelope CSVs are always written
    std::vector<PresetMember> members;
};

const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);

}  // namespace biphoton::cli
