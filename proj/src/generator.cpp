#include "apfnet/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "apfnet/errors.hpp"

namespace apfnet {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(rng_() % span);
  }
  bool chance(double p) { return uniform() < p; }
  double sign() { return chance(0.5) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 rng_;
};

// Keep obstacles off the start and the goal for the whole planning window so
// every scenario is solvable in principle.
constexpr double kStartClearance = 3.0;
constexpr double kGoalClearance = 2.5;
constexpr double kWindow = 10.0;  // [s]
constexpr int kMaxTries = 100;

double min_distance_over_window(const Obstacle& o, const Vec2& p) {
  // Closest approach of a constant-velocity point to p over [0, kWindow].
  const double vv = o.velocity.squaredNorm();
  double t = vv > 0.0 ? (p - o.position).dot(o.velocity) / vv : 0.0;
  t = std::clamp(t, 0.0, kWindow);
  return distance(o.position + o.velocity * t, p);
}

std::vector<double> lane_centres(double halfwidth, double lane_width) {
  std::vector<double> out;
  const int lanes = static_cast<int>(std::lround(2.0 * halfwidth / lane_width));
  for (int i = 0; i < lanes; ++i) out.push_back(-halfwidth + lane_width * (i + 0.5));
  return out;
}

Obstacle sample_obstacle(Sampler& rng, const Scenario& s, const GeneratorConfig& c,
                         const std::vector<double>& lanes, bool near_line, bool moving) {
  Obstacle o;
  o.radius = rng.uniform(c.radius_min, c.radius_max);
  if (near_line) {
    o.position = {s.ego.position.x + rng.uniform(6.0, c.goal_distance - 5.0),
                  s.ego.position.y + rng.sign() * rng.uniform(c.offset_min, c.offset_max)};
  } else {
    const double lane = lanes[static_cast<std::size_t>(rng.integer(0, int(lanes.size()) - 1))];
    o.position = {s.ego.position.x + rng.uniform(5.0, 40.0),
                  lane + rng.sign() * rng.uniform(c.offset_min, c.offset_max)};
  }
  if (moving) o.velocity = {rng.uniform(0.5, c.speed_max), 0.0};
  return o;
}

bool acceptable(const Obstacle& o, const Scenario& s) {
  return min_distance_over_window(o, s.ego.position) > o.radius + kStartClearance &&
         min_distance_over_window(o, s.goal) > o.radius + kGoalClearance;
}

}  // namespace

Difficulty parse_difficulty(const std::string& name) {
  if (name == "empty") return Difficulty::kEmpty;
  if (name == "static") return Difficulty::kStatic;
  if (name == "mixed") return Difficulty::kMixed;
  throw InputError("unknown difficulty '" + name + "' (expected empty, static or mixed)");
}

std::string to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kEmpty: return "empty";
    case Difficulty::kStatic: return "static";
    case Difficulty::kMixed: return "mixed";
  }
  return "unknown";
}

void GeneratorConfig::validate() const {
  if (horizon_steps < 1) throw InputError("generator.horizon_steps must be >= 1");
  if (!(dt > 0.0)) throw InputError("generator.dt must be positive");
  if (!(goal_distance > 12.0)) throw InputError("generator.goal_distance must exceed 12 m");
  if (!(lane_width > 0.0)) throw InputError("generator.lane_width must be positive");
  if (max_obstacles < 0) throw InputError("generator.max_obstacles must be >= 0");
  if (!(radius_min > 0.0 && radius_max >= radius_min)) {
    throw InputError("generator radii must satisfy 0 < radius_min <= radius_max");
  }
  if (!(offset_min >= 0.0 && offset_max >= offset_min && offset_max < 0.5 * lane_width)) {
    throw InputError("generator offsets must satisfy 0 <= offset_min <= offset_max < lane_width/2");
  }
  if (!(speed_max >= 0.5)) throw InputError("generator.speed_max must be >= 0.5");
  if (!(moving_fraction >= 0.0 && moving_fraction <= 1.0)) {
    throw InputError("generator.moving_fraction must lie in [0, 1]");
  }
}

std::vector<Scenario> generate_suite(std::size_t count, std::uint64_t seed,
                                     const GeneratorConfig& config) {
  if (count < 1) throw InputError("scenario count must be >= 1");
  config.validate();
  Sampler rng(seed);
  std::vector<Scenario> suite;
  suite.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Scenario s;
    s.horizon_steps = config.horizon_steps;
    s.dt = config.dt;
    s.road_halfwidth = config.lane_width * (rng.chance(0.5) ? 1.0 : 1.5);
    const auto lanes = lane_centres(s.road_halfwidth, config.lane_width);
    const double lane = lanes[static_cast<std::size_t>(rng.integer(0, int(lanes.size()) - 1))];
    s.ego.position = {0.0, lane};
    s.ego.velocity = {5.0, 0.0};
    s.goal = {config.goal_distance, lane};

    int n = 0;
    switch (config.difficulty) {
      case Difficulty::kEmpty: break;
      case Difficulty::kStatic: n = 1; break;
      case Difficulty::kMixed: n = rng.integer(0, config.max_obstacles); break;
    }
    for (int k = 0; k < n; ++k) {
      const bool near_line = config.difficulty == Difficulty::kStatic || k == 0;
      const bool moving =
          config.difficulty == Difficulty::kMixed && rng.chance(config.moving_fraction);
      for (int attempt = 0; attempt < kMaxTries; ++attempt) {
        const Obstacle o = sample_obstacle(rng, s, config, lanes, near_line, moving);
        if (acceptable(o, s)) {
          s.obstacles.push_back(o);
          break;
        }
      }
    }
    suite.push_back(std::move(s));
  }
  return suite;
}

}  // namespace apfnet
