#pragma once

#include <string>
#include <vector>

#include "polyfsi/config.hpp"

namespace polyfsi {

struct Preset {
    std::string name;
    std::string text;  // embedded copy; identical to presets/<name>.cfg in the tree
};

/// The fixed scenario catalogue; every entry also exists as a committed file.
const std::vector<Preset>& scenario_catalogue();

/// Null when the name is not in the catalogue.
const Preset* find_preset(const std::string& name);

/// Defaults overlaid with the named preset.
RunConfig preset_config(const std::string& name);

}  // namespace polyfsi
