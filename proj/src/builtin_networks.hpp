#pragma once

#include <map>
#include <string>

namespace hdrelay::detail {

const std::map<std::string, std::string>& builtin_networks();

}  // namespace hdrelay::detail
