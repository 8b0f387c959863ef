#include "apfnet/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "apfnet/errors.hpp"

namespace apfnet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr double kDomainSlack = 1e-9;

}  // namespace

void PlannerConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(step)) throw InputError("planner.step must be positive");
  if (!positive(v_max)) throw InputError("planner.v_max must be positive");
  if (!positive(dt)) throw InputError("planner.dt must be positive");
  if (!positive(goal_tol)) throw InputError("planner.goal_tol must be positive");
  if (!(safety_margin >= 0.0)) throw InputError("planner.safety_margin must be >= 0");
  if (!(g_min >= 0.0)) throw InputError("planner.g_min must be >= 0");
  if (!positive(grad_eps)) throw InputError("planner.grad_eps must be positive");
  if (budget < 1) throw InputError("planner.budget must be >= 1");
}

FieldSource FieldSource::analytic(const ApfParams& params) {
  params.validate();
  FieldSource f;
  f.impl_ = params;
  return f;
}

FieldSource FieldSource::learned(std::shared_ptr<const ModelParameters> params,
                                 const GridSpec& spec, int trained_horizon) {
  if (!params) throw InputError("learned field source needs model parameters");
  spec.validate();
  if (trained_horizon < 1) throw InputError("trained horizon must be >= 1");
  FieldSource f;
  f.impl_ = LearnedModel{std::move(params), spec, trained_horizon};
  return f;
}

FieldSource::Kind FieldSource::kind() const {
  return std::holds_alternative<ApfParams>(impl_) ? Kind::kAnalytic : Kind::kLearned;
}

const ApfParams& FieldSource::apf() const {
  if (kind() != Kind::kAnalytic) throw InputError("field source is not analytic");
  return std::get<ApfParams>(impl_);
}

const LearnedModel& FieldSource::model() const {
  if (kind() != Kind::kLearned) throw InputError("field source is not learned");
  return std::get<LearnedModel>(impl_);
}

BoundField::BoundField(const FieldSource& source, const Scenario& scenario)
    : kind_(source.kind()), scenario_(scenario) {
  if (kind_ == FieldSource::Kind::kAnalytic) {
    apf_ = source.apf();
    return;
  }
  const LearnedModel& m = source.model();
  spec_ = m.spec;
  std::vector<Map2d> inputs;
  const int frames = std::min(scenario.horizon_steps, m.trained_horizon);
  inputs.reserve(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) inputs.push_back(rasterize(scenario, t, spec_).values);
  frames_ = model_predict(inputs, *m.params);
}

double BoundField::value(const Vec2& p, double time) const {
  if (kind_ == FieldSource::Kind::kAnalytic) {
    const auto obstacles = obstacles_at_time(scenario_, time);
    return field_potential(p, scenario_, obstacles, apf_);
  }

  const Vec2 g = world_to_grid_coords(p, spec_, scenario_.ego.position);
  const double max_r = static_cast<double>(kGridRows - 1);
  const double max_c = static_cast<double>(kGridCols - 1);
  if (!(g.x >= -kDomainSlack && g.x <= max_r + kDomainSlack && g.y >= -kDomainSlack &&
        g.y <= max_c + kDomainSlack)) {
    throw InputError("learned field queried outside the grid extent");
  }
  const double gr = std::clamp(g.x, 0.0, max_r);
  const double gc = std::clamp(g.y, 0.0, max_c);
  const auto r0 = static_cast<std::size_t>(std::min(std::floor(gr), max_r - 1.0));
  const auto c0 = static_cast<std::size_t>(std::min(std::floor(gc), max_c - 1.0));
  const double fr = gr - static_cast<double>(r0);
  const double fc = gc - static_cast<double>(c0);

  const auto idx = static_cast<long>(std::floor(time / scenario_.dt + 1e-9));
  const auto frame = static_cast<std::size_t>(
      std::clamp<long>(idx, 0, static_cast<long>(frames_.size()) - 1));
  const Map2d& m = frames_[frame];
  return (1.0 - fr) * ((1.0 - fc) * m(r0, c0) + fc * m(r0, c0 + 1)) +
         fr * ((1.0 - fc) * m(r0 + 1, c0) + fc * m(r0 + 1, c0 + 1));
}

Vec2 BoundField::clampToDomain(const Vec2& p) const {
  if (kind_ == FieldSource::Kind::kAnalytic) return p;
  const Vec2 ego = scenario_.ego.position;
  const Vec2 lo = grid_to_world({0, 0}, spec_, ego);
  const Vec2 hi = grid_to_world({static_cast<int>(kGridRows) - 1, static_cast<int>(kGridCols) - 1},
                                spec_, ego);
  return {std::clamp(p.x, lo.x, hi.x), std::clamp(p.y, lo.y, hi.y)};
}

double field_value_at(const FieldSource& source, const Vec2& p, const Scenario& s, int t) {
  return BoundField(source, s).value(p, t * s.dt);
}

DescentStep descent_step(const BoundField& field, const Vec2& p, double time,
                         const PlannerConfig& config) {
  const double e = config.grad_eps;
  auto partial = [&](const Vec2& axis) {
    const Vec2 a = field.clampToDomain(p + axis * e);
    const Vec2 b = field.clampToDomain(p - axis * e);
    const double span = (a - b).dot(axis);
    if (span <= 0.0) return 0.0;
    return (field.value(a, time) - field.value(b, time)) / span;
  };

  DescentStep out;
  out.gradient = {partial({1.0, 0.0}), partial({0.0, 1.0})};
  const double gnorm = out.gradient.norm();
  Vec2 delta;
  if (gnorm > config.g_min) {
    delta = out.gradient * (-config.step / gnorm);
  } else {
    out.plateau = true;
    const Vec2 to_goal = field.scenario().goal - p;
    const double dist = to_goal.norm();
    if (dist > 0.0) delta = to_goal * (std::min(config.step, dist) / dist);
  }
  const double reach = config.v_max * config.dt;
  const double len = delta.norm();
  if (len > reach) delta = delta * (reach / len);

  Vec2 next = field.clampToDomain(p + delta);
  if (config.enforce_corridor) {
    const double w = field.scenario().road_halfwidth;
    next.y = std::clamp(next.y, -w, w);
  }
  out.position = next;
  return out;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::kReachedGoal: return "reached_goal";
    case Outcome::kCollided: return "collided";
    case Outcome::kTimedOut: return "timed_out";
  }
  return "unknown";
}

double Trajectory::dt() const {
  return points.size() >= 2 ? points[1].t - points[0].t : 0.0;
}

double closest_approach(const Vec2& a, const Vec2& b, const Vec2& oa, const Vec2& ob) {
  const Vec2 r0 = a - oa;
  const Vec2 dr = (b - a) - (ob - oa);
  const double denom = dr.squaredNorm();
  double s = denom > 0.0 ? -r0.dot(dr) / denom : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (r0 + dr * s).norm();
}

Trajectory plan_trajectory(const FieldSource& source, const Scenario& s,
                           const PlannerConfig& config) {
  s.validate();
  config.validate();
  Trajectory traj;
  const auto start = Clock::now();

  const BoundField field(source, s);
  const bool learned = source.kind() == FieldSource::Kind::kLearned;
  if (learned) traj.field_time_s = seconds_since(start);

  auto collides = [&](const Vec2& a, const Vec2& b, double t0, double t1) {
    for (const auto& o : s.obstacles) {
      const Vec2 oa = o.position + o.velocity * t0;
      const Vec2 ob = o.position + o.velocity * t1;
      if (closest_approach(a, b, oa, ob) < o.radius + config.safety_margin) return true;
    }
    return false;
  };

  Vec2 p = field.clampToDomain(s.ego.position);
  traj.points.push_back({0.0, p, s.ego.velocity});
  if (collides(p, p, 0.0, 0.0)) {
    traj.outcome = Outcome::kCollided;
  } else if (distance(p, s.goal) <= config.goal_tol) {
    traj.outcome = Outcome::kReachedGoal;
  } else {
    traj.outcome = Outcome::kTimedOut;
    for (int k = 1; k <= config.budget; ++k) {
      const double t_prev = (k - 1) * config.dt;
      const double t_next = k * config.dt;

      const auto step_start = Clock::now();
      const DescentStep step = descent_step(field, p, t_prev, config);
      if (!learned) traj.field_time_s += seconds_since(step_start);

      if (step.plateau) ++traj.plateau_steps;
      if (field.value(step.position, t_prev) >= field.value(p, t_prev)) ++traj.stall_steps;

      const Vec2 next = step.position;
      traj.points.push_back({t_next, next, (next - p) / config.dt});
      const bool hit = collides(p, next, t_prev, t_next);
      p = next;
      if (hit) {
        traj.outcome = Outcome::kCollided;
        break;
      }
      if (distance(p, s.goal) <= config.goal_tol) {
        traj.outcome = Outcome::kReachedGoal;
        break;
      }
    }
  }

  traj.descent_time_s = std::max(seconds_since(start) - traj.field_time_s, 1e-9);
  return traj;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,x,y,vx,vy\n";
  char line[160];
  for (const auto& pt : traj.points) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g\n", pt.t, pt.position.x,
                  pt.position.y, pt.velocity.x, pt.velocity.y);
    out += line;
  }
  std::snprintf(line, sizeof(line), "outcome,%s,plan_time_s,%.9g\n", to_string(traj.outcome).c_str(),
                traj.planTime());
  out += line;
  return out;
}

}  // namespace apfnet
