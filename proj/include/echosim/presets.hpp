#pragma once

#include "echosim/config.hpp"

#include <string>
#include <vector>

namespace echosim {

struct PresetInfo {
  std::string name;
  std::string description;
};

const std::vector<PresetInfo>& list_presets();

/// Fully resolved configuration for a named figure; ValidationError for unknown names.
RunConfig preset(const std::string& name);

} // namespace echosim
