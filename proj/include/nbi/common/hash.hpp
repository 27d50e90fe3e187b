#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace nbi {

std::uint64_t fnv1a64(std::string_view bytes);

/// 16 hex digits identifying a configuration. nlohmann::json objects keep
/// keys sorted, so dump() is canonical for a given value.
std::string config_hash(const nlohmann::json& config);

}  // namespace nbi
