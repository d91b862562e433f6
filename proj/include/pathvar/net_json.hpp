#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "pathvar/nets.hpp"

namespace pathvar {

using NetVariant = std::variant<GeneralReLUNet, CanonicalNet, NormalizedNet>;

nlohmann::json to_json(const GeneralReLUNet& net);
nlohmann::json to_json(const CanonicalNet& net);
nlohmann::json to_json(const NormalizedNet& net);

GeneralReLUNet general_net_from_json(const nlohmann::json& j);
CanonicalNet canonical_net_from_json(const nlohmann::json& j);
NormalizedNet normalized_net_from_json(const nlohmann::json& j);

// dispatches on the "canonical" / "normalized" flags
NetVariant net_from_json(const nlohmann::json& j);

// file helpers; parse and validation failures -> PreconditionError,
// filesystem failures -> IoError
NetVariant load_net(const std::string& path);
nlohmann::json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace pathvar
