#pragma once

#include "ddgroup/pipeline.hpp"
#include "ddgroup/synth_eval.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace ddgroup {

void to_json(nlohmann::json& j, const Box& box);
void from_json(const nlohmann::json& j, Box& box);

void to_json(nlohmann::json& j, const Region& region);
void to_json(nlohmann::json& j, const LinearFit& fit);
void to_json(nlohmann::json& j, const GroupReport& report);
void to_json(nlohmann::json& j, const RegionScore& score);

// Truth sidecar for synthetic datasets.
void to_json(nlohmann::json& j, const PlantedRegion& region);
void from_json(const nlohmann::json& j, PlantedRegion& region);
void to_json(nlohmann::json& j, const SynthConfig& config);
void from_json(const nlohmann::json& j, SynthConfig& config);

// Two-space indented dump with a trailing newline. Keys are emitted sorted
// and doubles round-trip, so equal values give equal bytes.
std::string json_string(const nlohmann::json& j);
std::string report_json_string(const GroupReport& report);
std::string reports_json_string(const std::vector<GroupReport>& reports);

}  // namespace ddgroup
