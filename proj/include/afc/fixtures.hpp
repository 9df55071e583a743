#pragma once

#include <string>
#include <vector>

#include "afc/formation_geometry.hpp"
#include "afc/scenario.hpp"

namespace afc {

/// Ids of the bundled scenarios: case1-nominal, case1-rotation, ...,
/// case2-combination.
std::vector<std::string> fixture_ids();
bool is_fixture(const std::string& id);

/// Bundled scenario; throws UnknownPreset for an unknown id.
ScenarioConfig fixture(const std::string& id);

/// Ten-agent spatial formation (4 leaders) with its 27-edge graph.
NominalFormation case1_formation();
/// Seven-agent planar formation (3 leaders) with its 16-edge graph.
NominalFormation case2_formation();

/// Two-decimal stress published for the ten-agent formation.
Matrix printed_case1_stress();

}  // namespace afc
