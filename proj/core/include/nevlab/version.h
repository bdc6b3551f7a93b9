#pragma once

#include <string>
#include <utility>
#include <vector>

namespace nevlab {

std::string version();

/// (component, version) for the library itself, the compiler and the
/// third-party code compiled into it.
std::vector<std::pair<std::string, std::string>> build_versions();

}  // namespace nevlab
