#pragma once

#include <string>

#include <json.hpp>

namespace pathvar {

// JSON writer with doubles at 17 significant digits so every emitted number
// round-trips exactly; non-finite doubles become null
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace pathvar
