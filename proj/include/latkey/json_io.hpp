#pragma once

#include "latkey/attack.hpp"
#include "latkey/harness.hpp"
#include "latkey/scheme.hpp"

#include <json.hpp>

#include <string>

namespace latkey {

using Json = nlohmann::json;

// Instance files: big integers as decimal strings; "meta" is optional and
// never consulted by the attack path.
Json instance_to_json(const AttackInstance& inst, bool include_meta);
AttackInstance instance_from_json(const Json& j);

Json report_to_json(const AttackReport& report);

CampaignConfig config_from_json(const Json& j);
Json config_to_json(const CampaignConfig& config);

Json campaign_to_json(const CampaignReport& report);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace latkey
