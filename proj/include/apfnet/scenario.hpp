#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "apfnet/map2d.hpp"
#include "apfnet/vec2.hpp"

namespace apfnet {

inline constexpr std::size_t kGridRows = 36;
inline constexpr std::size_t kGridCols = 9;
inline constexpr std::size_t kGridCells = kGridRows * kGridCols;

struct AgentState {
  Vec2 position;
  Vec2 velocity;
};

struct Obstacle {
  Vec2 position;
  Vec2 velocity;
  double radius = 1.0;
};

// World frame: x runs along the road, y is lateral with the road centred on
// y = 0. The drivable corridor is |y| <= road_halfwidth.
struct Scenario {
  AgentState ego;
  Vec2 goal;
  std::vector<Obstacle> obstacles;
  double road_halfwidth = 3.5;
  int horizon_steps = 1;
  double dt = 0.1;

  // Throws InputError describing the first violated invariant.
  void validate() const;
  bool insideCorridor(const Vec2& p) const;
};

struct GridCell {
  int row = 0;
  int col = 0;
  bool operator==(const GridCell&) const = default;
};

// Ego-centric 36x9 raster. Rows increase forward (+x), columns increase to
// the left (+y); ego_cell holds the ego position. The default anchor looks
// 58 m ahead and 12 m behind with +-4 m laterally between cell centres.
struct GridSpec {
  double cell_long = 2.0;
  double cell_lat = 1.0;
  GridCell ego_cell{6, 4};

  void validate() const;
};

enum class GridKind { kBinary, kField };

struct OccupancyGrid {
  Map2d values{kGridRows, kGridCols};
  GridKind kind = GridKind::kBinary;

  // Checks the value domain implied by kind.
  bool valid() const;
};

std::optional<GridCell> world_to_grid(const Vec2& p, const GridSpec& spec, const Vec2& ego);
Vec2 grid_to_world(const GridCell& cell, const GridSpec& spec, const Vec2& ego);

// Continuous grid coordinates: integer values land on cell centres.
Vec2 world_to_grid_coords(const Vec2& p, const GridSpec& spec, const Vec2& ego);

// Obstacle positions under constant-velocity propagation.
std::vector<Vec2> obstacles_at_time(const Scenario& s, double time);
std::vector<Vec2> step_obstacles(const Scenario& s, int t);

// Disc overlaps the closed axis-aligned rectangle [lo, hi] with positive area.
bool disc_overlaps_rect(const Vec2& centre, double radius, const Vec2& lo, const Vec2& hi);

OccupancyGrid rasterize(const Scenario& s, int t, const GridSpec& spec);
std::vector<OccupancyGrid> rasterize_sequence(const Scenario& s, const GridSpec& spec);

}  // namespace apfnet
