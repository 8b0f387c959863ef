#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "apfnet/apf.hpp"
#include "apfnet/evaluation.hpp"
#include "apfnet/generator.hpp"
#include "apfnet/planner.hpp"
#include "apfnet/scenario.hpp"
#include "apfnet/training.hpp"

namespace apfnet {

// Values given on the command line. Anything set here overrides the config
// file, which in turn overrides the built-in defaults.
struct CommandFlags {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> suite;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::string> source;
  std::optional<int> epochs;
  std::optional<int> count;
  std::optional<int> t;
  std::optional<int> index;
  std::optional<std::string> difficulty;
};

// Fully resolved settings for every subcommand.
struct RunConfig {
  std::uint64_t seed = 42;
  std::filesystem::path out = "out";
  std::filesystem::path suite;
  std::filesystem::path checkpoint;
  std::string source = "analytic";
  int count = 200;
  int t = 0;
  int index = 0;
  ApfParams apf;
  GridSpec grid;
  GeneratorConfig generator;
  TrainConfig train;
  PlannerConfig planner;
  MetricConfig metrics;

  void validate() const;
};

// Defaults <- JSON config file <- flags. Unknown config keys are rejected.
RunConfig resolve_config(const CommandFlags& flags);
RunConfig config_from_json(const std::string& json_text);
// Canonical JSON; config_from_json(config_to_json(c)) == c.
std::string config_to_json(const RunConfig& config);

// Each command writes config.json plus its artifacts into config.out.
void cmd_generate(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_heatmap(const RunConfig& config);
void cmd_plan(const RunConfig& config);
void cmd_evaluate(const RunConfig& config);

// Plain (P2) graymap: 255 * value, forward at the top, left on the left.
std::string heatmap_pgm(const Map2d& field);
// "row,col,x,y,value" per cell.
std::string heatmap_csv(const Map2d& field, const GridSpec& spec, const Vec2& ego);

// Field map the heatmap command renders for scenario s at step t.
Map2d field_map(const FieldSource& source, const Scenario& s, int t, const GridSpec& spec);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

// Runs subcommand `name`, mapping exceptions to exit codes with a one-line
// diagnostic on stderr.
int run_command(const std::string& name, const CommandFlags& flags);

}  // namespace apfnet
