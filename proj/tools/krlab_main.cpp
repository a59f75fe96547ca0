#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "krlab/config.hpp"
#include "krlab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Kantorovich-Rubinstein stability experiments for the continuity equation"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "Print the experiment names");
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  std::string config_path;
  std::optional<int> grid;
  std::optional<std::string> out;
  std::optional<int> jobs;
  run->add_option("config", config_path, "YAML config file")->required();
  run->add_option("--grid", grid, "Override the grid size list with a single size");
  run->add_option("--out", out, "Output directory");
  run->add_option("--jobs", jobs, "Worker threads");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    for (const auto& name : krlab::experiment_names()) std::cout << name << '\n';
    return 0;
  }

  try {
    krlab::RunConfig config = krlab::load_config(config_path);
    if (grid) config.grids = {*grid};
    if (out) config.output = *out;
    if (jobs) config.jobs = *jobs;
    krlab::validate(config);
    const auto record = krlab::run_experiment(config);
    record.write(config.output);
    std::cout << record.verdict_text();
    std::cout << "artifacts: " << config.output.string() << '\n';
    return record.passed() ? 0 : 1;
  } catch (const krlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
