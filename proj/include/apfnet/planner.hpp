#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "apfnet/apf.hpp"
#include "apfnet/map2d.hpp"
#include "apfnet/network.hpp"
#include "apfnet/scenario.hpp"

namespace apfnet {

struct PlannerConfig {
  double step = 0.5;            // alpha [m]
  double v_max = 15.0;          // [m/s]
  double dt = 0.1;              // [s]
  double goal_tol = 1.0;        // [m]
  double safety_margin = 0.5;   // [m]
  double g_min = 1e-6;          // plateau threshold on |grad U|
  double grad_eps = 0.25;       // central-difference half width [m]
  bool enforce_corridor = true; // treat the road boundary as a wall
  int budget = 300;             // max descent steps

  void validate() const;
};

struct LearnedModel {
  std::shared_ptr<const ModelParameters> params;
  GridSpec spec;
  int trained_horizon = 1;
};

// Either the closed-form potential or a trained network's predicted map.
class FieldSource {
 public:
  enum class Kind { kAnalytic, kLearned };

  static FieldSource analytic(const ApfParams& params);
  static FieldSource learned(std::shared_ptr<const ModelParameters> params, const GridSpec& spec,
                             int trained_horizon);

  Kind kind() const;
  const ApfParams& apf() const;
  const LearnedModel& model() const;

 private:
  std::variant<ApfParams, LearnedModel> impl_;
};

// A field source bound to one scenario. For the learned source this is where
// the network runs: one inference over the scenario's rasterised sequence.
class BoundField {
 public:
  BoundField(const FieldSource& source, const Scenario& scenario);

  // Analytic: total potential plus the boundary wall at `time`. Learned:
  // bilinear interpolation of frame floor(time / dt) at p; throws InputError
  // when p lies outside the span of cell centres.
  double value(const Vec2& p, double time) const;

  // Nearest point where value() is defined.
  Vec2 clampToDomain(const Vec2& p) const;

  FieldSource::Kind kind() const { return kind_; }
  const std::vector<Map2d>& frames() const { return frames_; }
  const Scenario& scenario() const { return scenario_; }

 private:
  FieldSource::Kind kind_;
  Scenario scenario_;
  ApfParams apf_;
  GridSpec spec_;
  std::vector<Map2d> frames_;
};

double field_value_at(const FieldSource& source, const Vec2& p, const Scenario& s, int t);

struct DescentStep {
  Vec2 position;
  Vec2 gradient;
  bool plateau = false;
};

// p' = p - step * grad/|grad| (central differences), or a goal-directed step
// of the same length when |grad| <= g_min; displacement clipped to v_max*dt.
DescentStep descent_step(const BoundField& field, const Vec2& p, double time,
                         const PlannerConfig& config);

enum class Outcome { kReachedGoal, kCollided, kTimedOut };
std::string to_string(Outcome o);

struct TrajectoryPoint {
  double t = 0.0;
  Vec2 position;
  Vec2 velocity;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  Outcome outcome = Outcome::kTimedOut;
  double field_time_s = 0.0;    // field construction / recomputation
  double descent_time_s = 0.0;  // everything else in the planning loop
  int plateau_steps = 0;
  int stall_steps = 0;          // steps that did not lower the field value

  double planTime() const { return field_time_s + descent_time_s; }
  double dt() const;
};

Trajectory plan_trajectory(const FieldSource& source, const Scenario& s,
                           const PlannerConfig& config);

// Closest approach between the ego moving a -> b and an obstacle moving
// oa -> ob over the same interval, both linear in time.
double closest_approach(const Vec2& a, const Vec2& b, const Vec2& oa, const Vec2& ob);

// "t,x,y,vx,vy" rows followed by "outcome,<value>,plan_time_s,<value>".
std::string trajectory_csv(const Trajectory& traj);

}  // namespace apfnet
