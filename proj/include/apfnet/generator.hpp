#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apfnet/scenario.hpp"

namespace apfnet {

// empty: no obstacles. static: one parked obstacle near the ego's line to the
// goal. mixed: zero to max_obstacles obstacles, each static or slowly moving.
enum class Difficulty { kEmpty, kStatic, kMixed };

Difficulty parse_difficulty(const std::string& name);
std::string to_string(Difficulty d);

struct GeneratorConfig {
  Difficulty difficulty = Difficulty::kMixed;
  int horizon_steps = 10;
  double dt = 0.5;            // [s]
  double goal_distance = 18.0;  // [m] straight ahead in the ego's lane
  double lane_width = 3.5;    // [m]
  int max_obstacles = 3;
  double radius_min = 0.3;    // [m]
  double radius_max = 0.6;    // [m]
  // Lateral offset of an obstacle from the lane centre it is placed in.
  double offset_min = 0.6;    // [m]
  double offset_max = 1.4;    // [m]
  double speed_max = 3.0;     // [m/s], forward speed of moving obstacles
  double moving_fraction = 0.5;

  void validate() const;
};

// Deterministic in (count, seed, config) on every platform: the sampler uses
// raw mt19937_64 output rather than the implementation-defined std
// distributions.
std::vector<Scenario> generate_suite(std::size_t count, std::uint64_t seed,
                                     const GeneratorConfig& config = {});

}  // namespace apfnet
