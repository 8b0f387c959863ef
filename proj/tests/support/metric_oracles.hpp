#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "apfnet/planner.hpp"
#include "apfnet/scenario.hpp"

namespace apfnet::testing {

// Brute-force metric definitions kept apart from the library code. Every
// constant is passed in explicitly.

inline Vec2 where_at(const Obstacle& o, double t) {
  return {o.position.x + o.velocity.x * t, o.position.y + o.velocity.y * t};
}

inline double oracle_ttc(const Trajectory& traj, const Scenario& s, double cap, double floor_s,
                         double ego_radius) {
  double best = cap;
  for (const auto& o : s.obstacles) {
    std::vector<double> gaps;
    for (const auto& pt : traj.points) {
      const Vec2 q = where_at(o, pt.t);
      const double dx = pt.position.x - q.x;
      const double dy = pt.position.y - q.y;
      gaps.push_back(std::sqrt(dx * dx + dy * dy) - o.radius - ego_radius);
    }
    for (std::size_t k = 1; k < gaps.size(); ++k) {
      const double speed = -(gaps[k] - gaps[k - 1]) / (traj.points[k].t - traj.points[k - 1].t);
      if (speed <= 0.0) continue;
      double ttc = gaps[k - 1] / speed;
      if (ttc < floor_s) ttc = floor_s;
      if (ttc < best) best = ttc;
    }
  }
  return best;
}

// Velocity, then acceleration, then jerk by successive first differences.
inline double oracle_jerk(const Trajectory& traj) {
  const std::size_t n = traj.points.size();
  const double dt = traj.points[1].t - traj.points[0].t;
  std::vector<Vec2> v, a, j;
  for (std::size_t k = 1; k < n; ++k) v.push_back((traj.points[k].position - traj.points[k - 1].position) / dt);
  for (std::size_t k = 1; k < v.size(); ++k) a.push_back((v[k] - v[k - 1]) / dt);
  for (std::size_t k = 1; k < a.size(); ++k) j.push_back((a[k] - a[k - 1]) / dt);
  double sum = 0.0;
  for (const auto& x : j) sum += std::hypot(x.x, x.y);
  return sum / static_cast<double>(j.size());
}

inline double oracle_headway(const Trajectory& traj, const Scenario& s, double cap, double lane) {
  double total = 0.0;
  for (const auto& pt : traj.points) {
    std::vector<double> ahead;
    for (const auto& o : s.obstacles) {
      const Vec2 q = where_at(o, pt.t);
      const double lon = q.x - pt.position.x;
      const double lat = std::fabs(q.y - pt.position.y);
      if (lon > 0.0 && lat <= lane) ahead.push_back(lon);
    }
    double nearest = cap;
    if (!ahead.empty()) nearest = std::min(cap, *std::min_element(ahead.begin(), ahead.end()));
    total += nearest;
  }
  return total / static_cast<double>(traj.points.size());
}

}  // namespace apfnet::testing
