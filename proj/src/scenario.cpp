#include "apfnet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apfnet/errors.hpp"

namespace apfnet {

namespace {

bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace

void Scenario::validate() const {
  if (horizon_steps < 1) throw InputError("horizon_steps must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("dt must be positive");
  if (!(road_halfwidth > 0.0) || !std::isfinite(road_halfwidth)) {
    throw InputError("road_halfwidth must be positive");
  }
  if (!finite(ego.position) || !finite(ego.velocity) || !finite(goal)) {
    throw InputError("ego and goal must be finite");
  }
  if (std::abs(goal.y) > road_halfwidth) throw InputError("goal lies outside the road corridor");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& o = obstacles[i];
    if (!(o.radius > 0.0) || !std::isfinite(o.radius)) {
      throw InputError("obstacle " + std::to_string(i) + ": radius must be positive");
    }
    if (!finite(o.position) || !finite(o.velocity)) {
      throw InputError("obstacle " + std::to_string(i) + ": non-finite state");
    }
  }
}

bool Scenario::insideCorridor(const Vec2& p) const { return std::abs(p.y) <= road_halfwidth; }

void GridSpec::validate() const {
  if (!(cell_long > 0.0) || !(cell_lat > 0.0)) throw InputError("cell sizes must be positive");
  if (ego_cell.row < 0 || ego_cell.row >= static_cast<int>(kGridRows) || ego_cell.col < 0 ||
      ego_cell.col >= static_cast<int>(kGridCols)) {
    throw InputError("ego_cell outside the 36x9 grid");
  }
}

bool OccupancyGrid::valid() const {
  if (values.rows() != kGridRows || values.cols() != kGridCols) return false;
  for (double v : values.values()) {
    if (kind == GridKind::kBinary) {
      if (v != 0.0 && v != 1.0) return false;
    } else if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      return false;
    }
  }
  return true;
}

Vec2 world_to_grid_coords(const Vec2& p, const GridSpec& spec, const Vec2& ego) {
  return {spec.ego_cell.row + (p.x - ego.x) / spec.cell_long,
          spec.ego_cell.col + (p.y - ego.y) / spec.cell_lat};
}

std::optional<GridCell> world_to_grid(const Vec2& p, const GridSpec& spec, const Vec2& ego) {
  const Vec2 g = world_to_grid_coords(p, spec, ego);
  const double row = std::floor(g.x + 0.5);
  const double col = std::floor(g.y + 0.5);
  if (!(row >= 0.0 && row < static_cast<double>(kGridRows) && col >= 0.0 &&
        col < static_cast<double>(kGridCols))) {
    return std::nullopt;
  }
  return GridCell{static_cast<int>(row), static_cast<int>(col)};
}

Vec2 grid_to_world(const GridCell& cell, const GridSpec& spec, const Vec2& ego) {
  return {ego.x + (cell.row - spec.ego_cell.row) * spec.cell_long,
          ego.y + (cell.col - spec.ego_cell.col) * spec.cell_lat};
}

std::vector<Vec2> obstacles_at_time(const Scenario& s, double time) {
  std::vector<Vec2> out;
  out.reserve(s.obstacles.size());
  for (const auto& o : s.obstacles) out.push_back(o.position + o.velocity * time);
  return out;
}

std::vector<Vec2> step_obstacles(const Scenario& s, int t) {
  return obstacles_at_time(s, t * s.dt);
}

bool disc_overlaps_rect(const Vec2& centre, double radius, const Vec2& lo, const Vec2& hi) {
  const double cx = std::clamp(centre.x, lo.x, hi.x);
  const double cy = std::clamp(centre.y, lo.y, hi.y);
  const double dx = centre.x - cx;
  const double dy = centre.y - cy;
  return dx * dx + dy * dy < radius * radius;
}

OccupancyGrid rasterize(const Scenario& s, int t, const GridSpec& spec) {
  if (t < 0 || t >= s.horizon_steps) {
    throw InputError("step index " + std::to_string(t) + " outside [0, " +
                     std::to_string(s.horizon_steps) + ")");
  }
  const auto positions = step_obstacles(s, t);
  const Vec2 half{0.5 * spec.cell_long, 0.5 * spec.cell_lat};

  OccupancyGrid grid;
  grid.kind = GridKind::kBinary;
  for (std::size_t r = 0; r < kGridRows; ++r) {
    for (std::size_t c = 0; c < kGridCols; ++c) {
      const Vec2 centre = grid_to_world({static_cast<int>(r), static_cast<int>(c)}, spec,
                                        s.ego.position);
      bool occupied = !s.insideCorridor(centre);
      for (std::size_t i = 0; !occupied && i < positions.size(); ++i) {
        occupied = disc_overlaps_rect(positions[i], s.obstacles[i].radius, centre - half,
                                      centre + half);
      }
      grid.values(r, c) = occupied ? 1.0 : 0.0;
    }
  }
  return grid;
}

std::vector<OccupancyGrid> rasterize_sequence(const Scenario& s, const GridSpec& spec) {
  std::vector<OccupancyGrid> out;
  out.reserve(static_cast<std::size_t>(s.horizon_steps));
  for (int t = 0; t < s.horizon_steps; ++t) out.push_back(rasterize(s, t, spec));
  return out;
}

}  // namespace apfnet
