// heatid: identify nonlinear convection in lumped heat-transfer models.
//
//   heatid simulate|identify|regress|validate|baseline --config <path>
//          [--data <csv>] [--out <dir>] [--seed <int>]
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "heatid/config.hpp"
#include "heatid/errors.hpp"
#include "heatid/pipeline.hpp"

namespace {

using Command = std::string (*)(const heatid::RunConfig&, const heatid::CommandPaths&);

const std::map<std::string, Command> kCommands = {
    {"simulate", heatid::cmd_simulate}, {"identify", heatid::cmd_identify},
    {"regress", heatid::cmd_regress},   {"validate", heatid::cmd_validate},
    {"baseline", heatid::cmd_baseline},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grey-box identification of nonlinear convection with a GP latent force model", "heatid"};
  app.require_subcommand(1);

  std::string config_path;
  std::string data_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;

  for (const auto& [name, _] : kCommands) {
    auto* sub = app.add_subcommand(name, "run the " + name + " step");
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--data", data_path, "measurement CSV (default <out>/measurements.csv)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the configured seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    heatid::RunConfig config = heatid::load_config(config_path);
    if (seed) config.set_seed(*seed);
    heatid::CommandPaths paths;
    paths.out_dir = out_dir;
    if (!data_path.empty()) paths.data = data_path;
    std::cout << kCommands.at(name)(config, paths) << '\n';
    return 0;
  } catch (const heatid::ValidationError& e) {
    std::cerr << "heatid " << name << ": error: " << e.what() << '\n';
    return 1;
  } catch (const heatid::NumericalError& e) {
    std::cerr << "heatid " << name << ": numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "heatid " << name << ": error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "heatid " << name << ": numerical failure: " << e.what() << '\n';
    return 2;
  }
}
