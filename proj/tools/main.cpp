#include <CLI11.hpp>

#include "apfnet/commands.hpp"

namespace {

template <typename T>
void bind_optional(CLI::App* app, const std::string& name, std::optional<T>& slot, const std::string& help) {
  app->add_option_function<T>(name, [&slot](const T& v) { slot = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potential-field occupancy toolkit"};
  app.require_subcommand(1);

  apfnet::CommandFlags flags;
  std::optional<std::string> config, out, suite, checkpoint;

  struct Spec {
    const char* name;
    const char* help;
  };
  const Spec specs[] = {
      {"generate", "Write a randomized scenario suite"},
      {"train", "Fit the network to analytic field maps"},
      {"heatmap", "Export one field map as PGM and CSV"},
      {"plan", "Plan one scenario and export the trajectory"},
      {"evaluate", "Compare analytic and learned planners over a suite"},
  };
  for (const auto& spec : specs) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    bind_optional(sub, "--config", config, "JSON config file");
    bind_optional(sub, "--seed", flags.seed, "Random seed");
    bind_optional(sub, "--out", out, "Output directory");
    bind_optional(sub, "--suite", suite, "Scenario suite file");
    bind_optional(sub, "--checkpoint", checkpoint, "Model checkpoint");
    sub->add_option_function<std::string>(
           "--source", [&flags](const std::string& v) { flags.source = v; }, "Field source")
        ->check(CLI::IsMember({"analytic", "learned"}));
    bind_optional(sub, "--epochs", flags.epochs, "Training epochs");
    bind_optional(sub, "--count", flags.count, "Number of scenarios to generate");
    bind_optional(sub, "--t", flags.t, "Time step for heatmap");
    bind_optional(sub, "--index", flags.index, "Scenario index within the suite");
    sub->add_option_function<std::string>(
           "--difficulty", [&flags](const std::string& v) { flags.difficulty = v; },
           "Generator difficulty")
        ->check(CLI::IsMember({"empty", "static", "mixed"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return apfnet::kExitUsage;
  }

  if (config) flags.config = *config;
  if (out) flags.out = *out;
  if (suite) flags.suite = *suite;
  if (checkpoint) flags.checkpoint = *checkpoint;
  return apfnet::run_command(app.get_subcommands().front()->get_name(), flags);
}
