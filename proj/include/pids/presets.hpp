#pragma once

#include "pids/engine.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace pids {

/// Named demo patches, one per synthesis regime worth auditioning. Names are
/// part of the CLI contract; add new ones rather than renaming.
struct Preset {
  std::string name;
  std::string description;
  Patch patch;
};

std::vector<Preset> const& presets();
Preset const* find_preset(std::string_view name);

} // namespace pids
