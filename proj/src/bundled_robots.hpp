#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace screwplan::detail {

/// {name, YAML text} for every file under robots/, embedded at build time.
const std::vector<std::pair<std::string_view, std::string_view>>& bundled_robot_sources();

}  // namespace screwplan::detail
