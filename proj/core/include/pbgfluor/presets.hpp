// presets.hpp — Built-in presets compiled in from presets/*.ini

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pbgfluor::presets {

std::vector<std::string> names();
bool exists(std::string_view name);
// Raw preset text; throws for unknown names.
std::string_view text(std::string_view name);

} // namespace pbgfluor::presets
