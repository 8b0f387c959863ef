#include "apfnet/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>

#include "apfnet/checkpoint.hpp"
#include "apfnet/errors.hpp"
#include "apfnet/scenario_io.hpp"
#include "json.hpp"

namespace apfnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_json(const RunConfig& c) {
  return {
      {"seed", c.seed},
      {"out", c.out.string()},
      {"suite", c.suite.string()},
      {"checkpoint", c.checkpoint.string()},
      {"source", c.source},
      {"count", c.count},
      {"t", c.t},
      {"index", c.index},
      {"apf", {{"xi", c.apf.xi}, {"eta", c.apf.eta}, {"d0", c.apf.d0}, {"u_cap", c.apf.u_cap}}},
      {"grid",
       {{"cell_long", c.grid.cell_long},
        {"cell_lat", c.grid.cell_lat},
        {"ego_row", c.grid.ego_cell.row},
        {"ego_col", c.grid.ego_cell.col}}},
      {"generator",
       {{"difficulty", to_string(c.generator.difficulty)},
        {"horizon_steps", c.generator.horizon_steps},
        {"dt", c.generator.dt},
        {"goal_distance", c.generator.goal_distance},
        {"lane_width", c.generator.lane_width},
        {"max_obstacles", c.generator.max_obstacles},
        {"radius_min", c.generator.radius_min},
        {"radius_max", c.generator.radius_max},
        {"offset_min", c.generator.offset_min},
        {"offset_max", c.generator.offset_max},
        {"speed_max", c.generator.speed_max},
        {"moving_fraction", c.generator.moving_fraction}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"optimizer", c.train.optimizer.kind == OptimizerKind::kAdam ? "adam" : "sgd"},
        {"learning_rate", c.train.optimizer.learning_rate},
        {"beta1", c.train.optimizer.beta1},
        {"beta2", c.train.optimizer.beta2},
        {"epsilon", c.train.optimizer.epsilon},
        {"train_fraction", c.train.train_fraction},
        {"lstm_hidden", c.train.lstm_hidden}}},
      {"planner",
       {{"step", c.planner.step},
        {"v_max", c.planner.v_max},
        {"dt", c.planner.dt},
        {"goal_tol", c.planner.goal_tol},
        {"safety_margin", c.planner.safety_margin},
        {"g_min", c.planner.g_min},
        {"grad_eps", c.planner.grad_eps},
        {"enforce_corridor", c.planner.enforce_corridor},
        {"budget", c.planner.budget}}},
      {"metrics",
       {{"ttc_cap", c.metrics.ttc_cap},
        {"ttc_floor", c.metrics.ttc_floor},
        {"headway_cap", c.metrics.headway_cap},
        {"ego_radius", c.metrics.ego_radius},
        {"lane_width", c.metrics.lane_width}}},
  };
}

RunConfig from_json(const json& j) {
  RunConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.out = j.at("out").get<std::string>();
  c.suite = j.at("suite").get<std::string>();
  c.checkpoint = j.at("checkpoint").get<std::string>();
  c.source = j.at("source").get<std::string>();
  c.count = j.at("count").get<int>();
  c.t = j.at("t").get<int>();
  c.index = j.at("index").get<int>();

  const json& a = j.at("apf");
  c.apf = {a.at("xi").get<double>(), a.at("eta").get<double>(), a.at("d0").get<double>(),
           a.at("u_cap").get<double>()};

  const json& g = j.at("grid");
  c.grid.cell_long = g.at("cell_long").get<double>();
  c.grid.cell_lat = g.at("cell_lat").get<double>();
  c.grid.ego_cell = {g.at("ego_row").get<int>(), g.at("ego_col").get<int>()};

  const json& gen = j.at("generator");
  c.generator.difficulty = parse_difficulty(gen.at("difficulty").get<std::string>());
  c.generator.horizon_steps = gen.at("horizon_steps").get<int>();
  c.generator.dt = gen.at("dt").get<double>();
  c.generator.goal_distance = gen.at("goal_distance").get<double>();
  c.generator.lane_width = gen.at("lane_width").get<double>();
  c.generator.max_obstacles = gen.at("max_obstacles").get<int>();
  c.generator.radius_min = gen.at("radius_min").get<double>();
  c.generator.radius_max = gen.at("radius_max").get<double>();
  c.generator.offset_min = gen.at("offset_min").get<double>();
  c.generator.offset_max = gen.at("offset_max").get<double>();
  c.generator.speed_max = gen.at("speed_max").get<double>();
  c.generator.moving_fraction = gen.at("moving_fraction").get<double>();

  const json& tr = j.at("train");
  c.train.epochs = tr.at("epochs").get<int>();
  const auto opt = tr.at("optimizer").get<std::string>();
  if (opt == "adam") {
    c.train.optimizer.kind = OptimizerKind::kAdam;
  } else if (opt == "sgd") {
    c.train.optimizer.kind = OptimizerKind::kSgd;
  } else {
    throw InputError("train.optimizer must be 'adam' or 'sgd'");
  }
  c.train.optimizer.learning_rate = tr.at("learning_rate").get<double>();
  c.train.optimizer.beta1 = tr.at("beta1").get<double>();
  c.train.optimizer.beta2 = tr.at("beta2").get<double>();
  c.train.optimizer.epsilon = tr.at("epsilon").get<double>();
  c.train.train_fraction = tr.at("train_fraction").get<double>();
  c.train.lstm_hidden = tr.at("lstm_hidden").get<int>();
  c.train.seed = c.seed;

  const json& p = j.at("planner");
  c.planner.step = p.at("step").get<double>();
  c.planner.v_max = p.at("v_max").get<double>();
  c.planner.dt = p.at("dt").get<double>();
  c.planner.goal_tol = p.at("goal_tol").get<double>();
  c.planner.safety_margin = p.at("safety_margin").get<double>();
  c.planner.g_min = p.at("g_min").get<double>();
  c.planner.grad_eps = p.at("grad_eps").get<double>();
  c.planner.enforce_corridor = p.at("enforce_corridor").get<bool>();
  c.planner.budget = p.at("budget").get<int>();

  const json& m = j.at("metrics");
  c.metrics.ttc_cap = m.at("ttc_cap").get<double>();
  c.metrics.ttc_floor = m.at("ttc_floor").get<double>();
  c.metrics.headway_cap = m.at("headway_cap").get<double>();
  c.metrics.ego_radius = m.at("ego_radius").get<double>();
  c.metrics.lane_width = m.at("lane_width").get<double>();

  c.validate();
  return c;
}

void reject_unknown_keys(const json& given, const json& known, const std::string& where) {
  if (!given.is_object()) throw InputError("config" + where + " must be a JSON object");
  for (const auto& [key, value] : given.items()) {
    const std::string path = where + "." + key;
    if (!known.contains(key)) throw InputError("unknown config key '" + path.substr(1) + "'");
    if (known.at(key).is_object()) reject_unknown_keys(value, known.at(key), path);
  }
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(what + ": " + e.what());
  }
}

void prepare_output(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec || !fs::is_directory(c.out)) {
    throw InputError("cannot create output directory '" + c.out.string() + "'");
  }
  write_text_file(c.out / "config.json", config_to_json(c));
}

const Scenario& pick_scenario(const std::vector<Scenario>& suite, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= suite.size()) {
    throw InputError("scenario index " + std::to_string(index) + " out of range (suite has " +
                     std::to_string(suite.size()) + ")");
  }
  return suite[static_cast<std::size_t>(index)];
}

std::vector<Scenario> require_suite(const RunConfig& c) {
  if (c.suite.empty()) throw InputError("--suite is required");
  return load_suite(c.suite);
}

FieldSource learned_source(const RunConfig& c) {
  if (c.checkpoint.empty()) throw InputError("learned source requires --checkpoint");
  Checkpoint ckpt = load_checkpoint(c.checkpoint);
  auto params = std::make_shared<const ModelParameters>(std::move(ckpt.params));
  return FieldSource::learned(std::move(params), c.grid, static_cast<int>(ckpt.horizon));
}

FieldSource selected_source(const RunConfig& c) {
  return c.source == "learned" ? learned_source(c) : FieldSource::analytic(c.apf);
}

std::string one_line(std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return msg;
}

}  // namespace

void RunConfig::validate() const {
  if (source != "analytic" && source != "learned") {
    throw InputError("source must be 'analytic' or 'learned'");
  }
  if (count < 1) throw InputError("count must be >= 1");
  if (t < 0) throw InputError("t must be >= 0");
  if (index < 0) throw InputError("index must be >= 0");
  if (out.empty()) throw InputError("out must not be empty");
  apf.validate();
  grid.validate();
  generator.validate();
  train.validate();
  planner.validate();
  if (!(metrics.ttc_cap > 0.0 && metrics.headway_cap > 0.0 && metrics.ego_radius >= 0.0 &&
        metrics.lane_width > 0.0 && metrics.ttc_floor > 0.0 &&
        metrics.ttc_floor <= metrics.ttc_cap)) {
    throw InputError("metrics: caps and lane width must be positive, 0 < ttc_floor <= ttc_cap");
  }
}

std::string config_to_json(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

RunConfig config_from_json(const std::string& json_text) {
  const json defaults = to_json(RunConfig{});
  const json given = parse_json(json_text, "config");
  reject_unknown_keys(given, defaults, "");
  json merged = defaults;
  merged.merge_patch(given);
  try {
    return from_json(merged);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

RunConfig resolve_config(const CommandFlags& flags) {
  RunConfig c;
  if (flags.config) c = config_from_json(read_text_file(*flags.config));
  if (flags.seed) {
    c.seed = *flags.seed;
    c.train.seed = *flags.seed;
  }
  if (flags.out) c.out = *flags.out;
  if (flags.suite) c.suite = *flags.suite;
  if (flags.checkpoint) c.checkpoint = *flags.checkpoint;
  if (flags.source) c.source = *flags.source;
  if (flags.epochs) c.train.epochs = *flags.epochs;
  if (flags.count) c.count = *flags.count;
  if (flags.t) c.t = *flags.t;
  if (flags.index) c.index = *flags.index;
  if (flags.difficulty) c.generator.difficulty = parse_difficulty(*flags.difficulty);
  c.validate();
  return c;
}

void cmd_generate(const RunConfig& c) {
  const auto suite = generate_suite(static_cast<std::size_t>(c.count), c.seed, c.generator);
  prepare_output(c);
  save_suite(c.out / "suite.json", suite);
}

void cmd_train(const RunConfig& c) {
  const auto suite = require_suite(c);
  if (suite.size() < 2) throw InputError("training needs at least 2 scenarios");
  const auto dataset = make_dataset(suite, c.grid, c.apf);
  int horizon = 1;
  for (const auto& s : suite) horizon = std::max(horizon, s.horizon_steps);

  prepare_output(c);
  FitResult result = fit(c.train, dataset);
  if (!result.params.allFinite()) throw NumericError("training produced non-finite parameters");
  save_checkpoint(c.out / "model.ckpt", {std::move(result.params), static_cast<std::uint32_t>(horizon)});
  write_text_file(c.out / "loss.csv", loss_history_csv(result.records));
}

Map2d field_map(const FieldSource& source, const Scenario& s, int t, const GridSpec& spec) {
  if (t < 0 || t >= s.horizon_steps) {
    throw InputError("t=" + std::to_string(t) + " outside [0, " +
                     std::to_string(s.horizon_steps) + ")");
  }
  if (source.kind() == FieldSource::Kind::kAnalytic) {
    return build_ideal_frame(s, t, spec, source.apf()).grid.values;
  }
  const BoundField bound(source, s);
  const auto& frames = bound.frames();
  return frames[std::min(static_cast<std::size_t>(t), frames.size() - 1)];
}

std::string heatmap_pgm(const Map2d& field) {
  std::string out = "P2\n" + std::to_string(field.cols()) + " " + std::to_string(field.rows()) +
                    "\n255\n";
  for (std::size_t i = 0; i < field.rows(); ++i) {
    const std::size_t r = field.rows() - 1 - i;
    for (std::size_t j = 0; j < field.cols(); ++j) {
      const std::size_t c = field.cols() - 1 - j;
      const double v = std::clamp(field(r, c), 0.0, 1.0);
      if (j) out += ' ';
      out += std::to_string(static_cast<int>(std::lround(255.0 * v)));
    }
    out += '\n';
  }
  return out;
}

std::string heatmap_csv(const Map2d& field, const GridSpec& spec, const Vec2& ego) {
  std::string out = "row,col,x,y,value\n";
  char line[160];
  for (std::size_t r = 0; r < field.rows(); ++r) {
    for (std::size_t c = 0; c < field.cols(); ++c) {
      const Vec2 p = grid_to_world({static_cast<int>(r), static_cast<int>(c)}, spec, ego);
      std::snprintf(line, sizeof(line), "%zu,%zu,%.17g,%.17g,%.17g\n", r, c, p.x, p.y, field(r, c));
      out += line;
    }
  }
  return out;
}

void cmd_heatmap(const RunConfig& c) {
  const auto suite = require_suite(c);
  const Scenario& s = pick_scenario(suite, c.index);
  const FieldSource source = selected_source(c);
  const Map2d field = field_map(source, s, c.t, c.grid);
  prepare_output(c);
  const std::string stem = "heatmap_" + c.source + "_t" + std::to_string(c.t);
  write_text_file(c.out / (stem + ".pgm"), heatmap_pgm(field));
  write_text_file(c.out / (stem + ".csv"), heatmap_csv(field, c.grid, s.ego.position));
}

void cmd_plan(const RunConfig& c) {
  const auto suite = require_suite(c);
  const Scenario& s = pick_scenario(suite, c.index);
  const FieldSource source = selected_source(c);
  const Trajectory traj = plan_trajectory(source, s, c.planner);
  prepare_output(c);
  write_text_file(c.out / ("trajectory_" + c.source + ".csv"), trajectory_csv(traj));
}

void cmd_evaluate(const RunConfig& c) {
  const auto suite = require_suite(c);
  const FieldSource learned = learned_source(c);
  const FieldSource analytic = FieldSource::analytic(c.apf);
  const EvalReport report = evaluate_suite(suite, analytic, learned, c.planner, c.metrics);
  prepare_output(c);
  write_text_file(c.out / "per_scenario.csv", per_scenario_csv(report));
  write_text_file(c.out / "summary.csv", summary_csv(report));
  write_text_file(c.out / "summary.json", summary_json(report));
}

int run_command(const std::string& name, const CommandFlags& flags) {
  try {
    const RunConfig config = resolve_config(flags);
    if (name == "generate") {
      cmd_generate(config);
    } else if (name == "train") {
      cmd_train(config);
    } else if (name == "heatmap") {
      cmd_heatmap(config);
    } else if (name == "plan") {
      cmd_plan(config);
    } else if (name == "evaluate") {
      cmd_evaluate(config);
    } else {
      std::cerr << "apfnet: unknown command '" << name << "'\n";
      return kExitUsage;
    }
    return kExitOk;
  } catch (const NumericError& e) {
    std::cerr << "apfnet: numeric error: " << one_line(e.what()) << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "apfnet: error: " << one_line(e.what()) << '\n';
    return kExitInput;
  }
}

}  // namespace apfnet
