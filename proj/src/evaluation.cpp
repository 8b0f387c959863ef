#include "apfnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "apfnet/errors.hpp"
#include "json.hpp"

namespace apfnet {

namespace {

Vec2 obstacle_at(const Obstacle& o, double t) { return o.position + o.velocity * t; }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string footer(const MetricConfig& m) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "# completion: outcome == reached_goal (no collision, no timeout)\n"
                "# TTC: min gap/closing speed, gap = centre distance - radius - ego radius %.3g m, "
                "cap %.3g s\n"
                "# Head-Way: mean longitudinal gap to nearest in-lane leader (|dy| <= %.3g m), "
                "cap %.3g m\n"
                "# Jerk: mean |third finite difference| / dt^3 [m/s^3]\n"
                "# Time: mean wall-clock field construction + descent per scenario [s]\n"
                "# TTC and Head-Way average only scenarios with at least one obstacle\n",
                m.ego_radius, m.ttc_cap, m.lane_width, m.headway_cap);
  return buf;
}

}  // namespace

double compute_ttc(const Trajectory& traj, const Scenario& s, const MetricConfig& m) {
  if (traj.points.empty()) throw InputError("compute_ttc: empty trajectory");
  double best = m.ttc_cap;
  for (std::size_t k = 0; k + 1 < traj.points.size(); ++k) {
    const auto& a = traj.points[k];
    const auto& b = traj.points[k + 1];
    const double dt = b.t - a.t;
    if (!(dt > 0.0)) continue;
    for (const auto& o : s.obstacles) {
      const double gap_a = distance(a.position, obstacle_at(o, a.t)) - o.radius - m.ego_radius;
      const double gap_b = distance(b.position, obstacle_at(o, b.t)) - o.radius - m.ego_radius;
      const double closing = (gap_a - gap_b) / dt;
      if (!(closing > 0.0)) continue;
      best = std::min(best, std::max(gap_a / closing, m.ttc_floor));
    }
  }
  return best;
}

double compute_jerk(const Trajectory& traj) {
  const auto& pts = traj.points;
  if (pts.size() < 4) throw InputError("compute_jerk: needs at least 4 points");
  const double dt = pts[1].t - pts[0].t;
  if (!(dt > 0.0)) throw InputError("compute_jerk: non-increasing timestamps");
  const double dt3 = dt * dt * dt;
  double sum = 0.0;
  for (std::size_t k = 0; k + 3 < pts.size(); ++k) {
    const Vec2 d3 = pts[k + 3].position - pts[k + 2].position * 3.0 + pts[k + 1].position * 3.0 -
                    pts[k].position;
    sum += d3.norm() / dt3;
  }
  return sum / static_cast<double>(pts.size() - 3);
}

double compute_headway(const Trajectory& traj, const Scenario& s, const MetricConfig& m) {
  if (traj.points.empty()) throw InputError("compute_headway: empty trajectory");
  double sum = 0.0;
  for (const auto& pt : traj.points) {
    double nearest = m.headway_cap;
    for (const auto& o : s.obstacles) {
      const Vec2 rel = obstacle_at(o, pt.t) - pt.position;
      if (rel.x > 0.0 && std::abs(rel.y) <= m.lane_width) nearest = std::min(nearest, rel.x);
    }
    sum += nearest;
  }
  return sum / static_cast<double>(traj.points.size());
}

bool task_completed(const Trajectory& traj) { return traj.outcome == Outcome::kReachedGoal; }

double min_clearance(const Trajectory& traj, const Scenario& s) {
  double best = std::numeric_limits<double>::infinity();
  const auto& pts = traj.points;
  for (const auto& o : s.obstacles) {
    if (pts.size() == 1) {
      best = std::min(best, distance(pts[0].position, obstacle_at(o, pts[0].t)) - o.radius);
    }
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      const double d = closest_approach(pts[k].position, pts[k + 1].position,
                                        obstacle_at(o, pts[k].t), obstacle_at(o, pts[k + 1].t));
      best = std::min(best, d - o.radius);
    }
  }
  return best;
}

ScenarioResult score_trajectory(std::size_t index, const Trajectory& traj, const Scenario& s,
                                const MetricConfig& m) {
  ScenarioResult r;
  r.index = index;
  r.outcome = traj.outcome;
  r.completed = task_completed(traj);
  r.has_obstacles = !s.obstacles.empty();
  r.ttc_min = compute_ttc(traj, s, m);
  // Trajectories shorter than the jerk stencil have not accelerated at all.
  r.jerk_mean = traj.points.size() >= 4 ? compute_jerk(traj) : 0.0;
  r.headway_mean = compute_headway(traj, s, m);
  r.min_clearance = min_clearance(traj, s);
  r.steps = static_cast<int>(traj.points.size()) - 1;
  r.plateau_steps = traj.plateau_steps;
  r.stall_steps = traj.stall_steps;
  r.field_time_s = traj.field_time_s;
  r.descent_time_s = traj.descent_time_s;
  r.plan_time_s = traj.planTime();
  return r;
}

MethodSummary summarize(const std::string& method, std::span<const ScenarioResult> rows,
                        const MetricConfig& m) {
  MethodSummary s;
  s.method = method;
  s.scenarios = rows.size();
  if (rows.empty()) return s;
  std::size_t with_obstacles = 0;
  double ttc = 0.0, headway = 0.0;
  for (const auto& r : rows) {
    if (r.completed) ++s.completed;
    s.jerk += r.jerk_mean;
    s.time_s += r.plan_time_s;
    s.field_time_s += r.field_time_s;
    s.descent_time_s += r.descent_time_s;
    if (r.has_obstacles) {
      ++with_obstacles;
      ttc += r.ttc_min;
      headway += r.headway_mean;
    }
  }
  const double n = static_cast<double>(rows.size());
  s.tcr = static_cast<double>(s.completed) / n;
  s.jerk /= n;
  s.time_s /= n;
  s.field_time_s /= n;
  s.descent_time_s /= n;
  s.ttc = with_obstacles ? ttc / static_cast<double>(with_obstacles) : m.ttc_cap;
  s.headway = with_obstacles ? headway / static_cast<double>(with_obstacles) : m.headway_cap;
  return s;
}

MethodReport evaluate_method(const std::string& method, std::span<const Scenario> suite,
                             const FieldSource& source, const PlannerConfig& planner,
                             const MetricConfig& metrics) {
  if (suite.empty()) throw InputError("evaluate: empty scenario suite");
  MethodReport report;
  report.rows.reserve(suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const Trajectory traj = plan_trajectory(source, suite[i], planner);
    report.rows.push_back(score_trajectory(i, traj, suite[i], metrics));
  }
  report.summary = summarize(method, report.rows, metrics);
  return report;
}

EvalReport evaluate_suite(std::span<const Scenario> suite, const FieldSource& analytic,
                          const FieldSource& learned, const PlannerConfig& planner,
                          const MetricConfig& metrics) {
  EvalReport report;
  report.metrics = metrics;
  report.methods.push_back(evaluate_method("APF", suite, analytic, planner, metrics));
  report.methods.push_back(evaluate_method("Ours", suite, learned, planner, metrics));
  return report;
}

std::string per_scenario_csv(const EvalReport& report) {
  std::string out =
      "scenario,method,outcome,completed,ttc_min,jerk_mean,headway_mean,min_clearance,steps,"
      "plateau_steps,stall_steps,field_time_s,descent_time_s,plan_time_s\n";
  for (const auto& m : report.methods) {
    for (const auto& r : m.rows) {
      out += std::to_string(r.index) + "," + m.summary.method + "," + to_string(r.outcome) + "," +
             (r.completed ? "1" : "0") + "," + fmt17(r.ttc_min) + "," + fmt17(r.jerk_mean) + "," +
             fmt17(r.headway_mean) + "," + fmt17(r.min_clearance) + "," + std::to_string(r.steps) +
             "," + std::to_string(r.plateau_steps) + "," + std::to_string(r.stall_steps) + "," +
             fmt17(r.field_time_s) + "," + fmt17(r.descent_time_s) + "," + fmt17(r.plan_time_s) +
             "\n";
    }
  }
  return out;
}

std::string summary_csv(const EvalReport& report) {
  std::string out = "Method,TCR,TTC,Jerk,Head-Way,Time\n";
  char line[256];
  for (const auto& m : report.methods) {
    const auto& s = m.summary;
    std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.6f,%.6f,%.6g\n", s.method.c_str(), s.tcr,
                  s.ttc, s.jerk, s.headway, s.time_s);
    out += line;
  }
  return out + footer(report.metrics);
}

std::string summary_json(const EvalReport& report) {
  using nlohmann::json;
  json methods = json::array();
  for (const auto& m : report.methods) {
    const auto& s = m.summary;
    methods.push_back({{"method", s.method},
                       {"scenarios", s.scenarios},
                       {"completed", s.completed},
                       {"tcr", s.tcr},
                       {"ttc", s.ttc},
                       {"jerk", s.jerk},
                       {"headway", s.headway},
                       {"time_s", s.time_s},
                       {"field_time_s", s.field_time_s},
                       {"descent_time_s", s.descent_time_s}});
  }
  const auto& mc = report.metrics;
  json doc{{"methods", std::move(methods)},
           {"conventions",
            {{"completion", "outcome == reached_goal"},
             {"ttc_cap_s", mc.ttc_cap},
             {"ttc_floor_s", mc.ttc_floor},
             {"headway_cap_m", mc.headway_cap},
             {"ego_radius_m", mc.ego_radius},
             {"lane_width_m", mc.lane_width},
             {"time", "wall-clock field construction + descent per scenario, seconds"}}}};
  return doc.dump(2) + "\n";
}

}  // namespace apfnet
