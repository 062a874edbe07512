#pragma once

// YAML scenario files. Lengths in m, forces in N, times in s; every angle
// in the file is in degrees and converted to radians on load.
//
//   duration: 30
//   seed: 7
//   tether: {omega: 0.0478, length: 1.6}
//   anchor: {r: 0, z: 0.754}
//   initial: {position: [0, 0, 1]}
//   controller:
//     mode: tension_following     # position_hold | tension_goal
//     goal: [0, 0, 1]
//   pulls:
//     - {start: 5, end: 12, magnitude: 0.2}

#include <cstdint>
#include <string>
#include <string_view>

#include "tetherfly/simkit.hpp"

namespace tetherfly::scenario {

// Throws Error(InvalidConfig) listing every unknown key, type error and
// violated constraint at once.
sim::Scenario parse_scenario(std::string_view text, std::string name = "scenario");
sim::Scenario load_scenario(const std::string& path);

// 64-bit FNV-1a, used to tag traces with the config they came from.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace tetherfly::scenario
