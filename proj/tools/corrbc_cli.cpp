#include "corrbc.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Correlated-channel broadcast experiments"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List registered experiments");

  auto* run = app.add_subcommand("run", "Run a named experiment or a config file");
  std::string name, config, out_dir = "results";
  std::uint64_t seed = 0;
  std::int64_t trials = 0;
  unsigned threads = 0;
  bool dry = false;
  run->add_option("name", name, "Experiment name (see 'list')");
  run->add_option("-c,--config", config, "JSON config: a full spec, {\"experiment\": name, ...}, or a sidecar");
  run->add_option("-o,--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--trials", trials, "Override the Monte Carlo trial count");
  run->add_option("--threads", threads, "Worker threads (0 = hardware)");
  run->add_flag("--dry-run", dry, "Validate and echo the config without computing");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      std::cout << corrbc::list_experiments();
      return 0;
    }
    if (name.empty() == config.empty()) {
      std::cerr << "error: give exactly one of an experiment name or --config\n";
      return 2;
    }
    corrbc::ExperimentSpec spec = config.empty() ? corrbc::find_experiment(name) : corrbc::load_spec(config);
    if (run->count("--seed")) spec.seed = seed;
    if (run->count("--trials")) spec.trials = trials;
    const auto o = corrbc::run_experiment(spec, dry, threads);
    if (dry) {
      std::cout << o.sidecar.dump(2) << "\n";
      return 0;
    }
    corrbc::write_outputs(o, out_dir);
    std::cout << spec.name << ": " << o.data.rows.size() << " rows in " << o.seconds << " s -> " << out_dir << "/"
              << spec.output << ".{csv,json}\n";
  } catch (const corrbc::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
