#pragma once

#include <span>
#include <vector>

#include "apfnet/map2d.hpp"
#include "apfnet/scenario.hpp"
#include "apfnet/vec2.hpp"

namespace apfnet {

// Distances to an obstacle are clamped to this before evaluating the
// repulsive term, which otherwise diverges at the obstacle centre.
inline constexpr double kMinObstacleDistance = 0.1;

struct ApfParams {
  double xi = 0.05;     // attraction gain [1/m^2]
  double eta = 2.0;     // repulsion gain
  double d0 = 8.0;      // repulsion cutoff [m]
  double u_cap = 10.0;  // normalisation cap

  void validate() const;
};

struct FieldFrame {
  OccupancyGrid grid;   // min(raw, u_cap) / u_cap
  Map2d raw_potential{kGridRows, kGridCols};
};

// 0.5 * xi * |x - goal|^2
double attractive_potential(const Vec2& x, const Vec2& goal, double xi);

// Sum over obstacles of 0.5 * eta * (1/d - 1/d0)^2 for d <= d0, else 0.
double repulsive_potential(const Vec2& x, std::span<const Vec2> obstacles, double eta, double d0);

double total_potential(const Vec2& x, const Vec2& goal, std::span<const Vec2> obstacles,
                       const ApfParams& params);

// Total potential plus the road-boundary wall (u_cap outside the corridor).
double field_potential(const Vec2& x, const Scenario& s, std::span<const Vec2> obstacles,
                       const ApfParams& params);

FieldFrame build_ideal_frame(const Scenario& s, int t, const GridSpec& spec,
                             const ApfParams& params);
std::vector<FieldFrame> build_ideal_sequence(const Scenario& s, const GridSpec& spec,
                                             const ApfParams& params);

}  // namespace apfnet
