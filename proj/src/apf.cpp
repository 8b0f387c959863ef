#include "apfnet/apf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apfnet/errors.hpp"

namespace apfnet {

void ApfParams::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(xi)) throw InputError("apf.xi must be positive");
  if (!positive(eta)) throw InputError("apf.eta must be positive");
  if (!positive(d0)) throw InputError("apf.d0 must be positive");
  if (!positive(u_cap)) throw InputError("apf.u_cap must be positive");
}

double attractive_potential(const Vec2& x, const Vec2& goal, double xi) {
  return 0.5 * xi * (x - goal).squaredNorm();
}

double repulsive_potential(const Vec2& x, std::span<const Vec2> obstacles, double eta, double d0) {
  double u = 0.0;
  for (const auto& o : obstacles) {
    const double d = distance(x, o);
    if (d > d0) continue;
    const double inv = 1.0 / std::max(d, kMinObstacleDistance) - 1.0 / d0;
    u += 0.5 * eta * inv * inv;
  }
  return u;
}

double total_potential(const Vec2& x, const Vec2& goal, std::span<const Vec2> obstacles,
                       const ApfParams& params) {
  return attractive_potential(x, goal, params.xi) +
         repulsive_potential(x, obstacles, params.eta, params.d0);
}

double field_potential(const Vec2& x, const Scenario& s, std::span<const Vec2> obstacles,
                       const ApfParams& params) {
  const double u = total_potential(x, s.goal, obstacles, params);
  return s.insideCorridor(x) ? u : u + params.u_cap;
}

FieldFrame build_ideal_frame(const Scenario& s, int t, const GridSpec& spec,
                             const ApfParams& params) {
  if (t < 0 || t >= s.horizon_steps) {
    throw InputError("step index " + std::to_string(t) + " outside the scenario horizon");
  }
  const auto obstacles = step_obstacles(s, t);
  FieldFrame frame;
  frame.grid.kind = GridKind::kField;
  for (std::size_t r = 0; r < kGridRows; ++r) {
    for (std::size_t c = 0; c < kGridCols; ++c) {
      const Vec2 centre = grid_to_world({static_cast<int>(r), static_cast<int>(c)}, spec,
                                        s.ego.position);
      const double u = field_potential(centre, s, obstacles, params);
      frame.raw_potential(r, c) = u;
      frame.grid.values(r, c) = std::min(u, params.u_cap) / params.u_cap;
    }
  }
  return frame;
}

std::vector<FieldFrame> build_ideal_sequence(const Scenario& s, const GridSpec& spec,
                                             const ApfParams& params) {
  std::vector<FieldFrame> out;
  out.reserve(static_cast<std::size_t>(s.horizon_steps));
  for (int t = 0; t < s.horizon_steps; ++t) out.push_back(build_ideal_frame(s, t, spec, params));
  return out;
}

}  // namespace apfnet
