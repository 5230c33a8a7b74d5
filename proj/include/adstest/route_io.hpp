#pragma once

#include <string>
#include <string_view>

#include "adstest/microworld.hpp"

namespace adstest {

/// JSON object whose fields match RouteSpec; poses are {x, y, heading}.
std::string route_to_json(const RouteSpec& spec, int indent = 2);
/// Throws ConfigError on malformed input or a route that fails validation.
RouteSpec route_from_json(std::string_view text);
RouteSpec load_route_file(const std::string& path);

}  // namespace adstest
