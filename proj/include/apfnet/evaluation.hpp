#pragma once

#include <span>
#include <string>
#include <vector>

#include "apfnet/planner.hpp"
#include "apfnet/scenario.hpp"

namespace apfnet {

// Metric conventions. None of these are standardised; every report footer
// repeats them.
struct MetricConfig {
  double ttc_cap = 10.0;      // [s]
  double ttc_floor = 1e-3;    // [s], for already-overlapping closing pairs
  double headway_cap = 50.0;  // [m]
  double ego_radius = 1.0;    // [m]
  double lane_width = 3.5;    // [m], leaders count within this lateral offset
};

// Minimum over timesteps and obstacles of gap / closing speed, where
// gap = centre distance - obstacle radius - ego radius and the closing speed
// is the forward difference of the gap. Only closing pairs count.
double compute_ttc(const Trajectory& traj, const Scenario& s, const MetricConfig& m = {});

// Mean magnitude of the third finite difference of position over dt^3.
// Needs at least four points.
double compute_jerk(const Trajectory& traj);

// Mean over timesteps of the longitudinal gap to the nearest leader in lane,
// capped; timesteps with no leader count as the cap.
double compute_headway(const Trajectory& traj, const Scenario& s, const MetricConfig& m = {});

bool task_completed(const Trajectory& traj);

// Smallest surface clearance (closest approach minus radius) along the
// piecewise-linear trajectory; +inf without obstacles.
double min_clearance(const Trajectory& traj, const Scenario& s);

struct ScenarioResult {
  std::size_t index = 0;
  Outcome outcome = Outcome::kTimedOut;
  bool completed = false;
  bool has_obstacles = false;
  double ttc_min = 0.0;
  double jerk_mean = 0.0;
  double headway_mean = 0.0;
  double min_clearance = 0.0;
  int steps = 0;
  int plateau_steps = 0;
  int stall_steps = 0;
  double field_time_s = 0.0;
  double descent_time_s = 0.0;
  double plan_time_s = 0.0;
};

struct MethodSummary {
  std::string method;
  std::size_t scenarios = 0;
  std::size_t completed = 0;
  double tcr = 0.0;
  double ttc = 0.0;
  double jerk = 0.0;
  double headway = 0.0;
  double time_s = 0.0;
  double field_time_s = 0.0;
  double descent_time_s = 0.0;
};

struct MethodReport {
  MethodSummary summary;
  std::vector<ScenarioResult> rows;
};

struct EvalReport {
  std::vector<MethodReport> methods;  // "APF" (analytic) then "Ours" (learned)
  MetricConfig metrics;
};

ScenarioResult score_trajectory(std::size_t index, const Trajectory& traj, const Scenario& s,
                                const MetricConfig& m);
MethodSummary summarize(const std::string& method, std::span<const ScenarioResult> rows,
                        const MetricConfig& m);

MethodReport evaluate_method(const std::string& method, std::span<const Scenario> suite,
                             const FieldSource& source, const PlannerConfig& planner,
                             const MetricConfig& metrics = {});

EvalReport evaluate_suite(std::span<const Scenario> suite, const FieldSource& analytic,
                          const FieldSource& learned, const PlannerConfig& planner,
                          const MetricConfig& metrics = {});

// One row per scenario and method; the three timing columns come last.
std::string per_scenario_csv(const EvalReport& report);
// "Method,TCR,TTC,Jerk,Head-Way,Time" plus a '#' footer stating conventions.
std::string summary_csv(const EvalReport& report);
std::string summary_json(const EvalReport& report);

}  // namespace apfnet
