#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "nevlab/errors.h"
#include "runner.h"

namespace {

constexpr int kAllPass = 0;
constexpr int kAuditFailure = 1;
constexpr int kConfigError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nevlab: Nevanlinna theory and Brownian motion audits on model surfaces"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  int verbosity = 0;
  bool dump_paths = false;

  CLI::App* run = app.add_subcommand("run", "run the audits selected by a configuration file");
  run->add_option("-c,--config", config_path, "JSON experiment configuration")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output-dir", output_dir, "override output_dir");
  run->add_option("-s,--seed", seed, "override sim.seed");
  run->add_option("-w,--workers", workers, "override sim.workers (default: NEVLAB_WORKERS or all cores)");
  run->add_flag("-v,--verbose", verbosity, "progress on stderr; repeat for more");
  run->add_flag("--dump-paths", dump_paths, "write per-path records of every simulated ensemble");

  app.add_subcommand("list", "list built-in maps, surfaces and audits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kAllPass : kConfigError;
  }

  if (app.got_subcommand("list")) {
    nevlab::cli::list_catalog(std::cout);
    return kAllPass;
  }

  nevlab::cli::ExperimentConfig config;
  try {
    config = nevlab::cli::load_config(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (seed) config.sim.seed = *seed;
    if (workers) config.sim.workers = *workers;
    nevlab::cli::validate(config);
  } catch (const nevlab::cli::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    nevlab::cli::RunOptions options;
    options.dump_paths = dump_paths;
    options.verbosity = verbosity;
    options.log = &std::cerr;
    const nevlab::cli::RunResult result = nevlab::cli::run(config, options);
    for (const auto& a : result.audits)
      std::cout << a.name << ' ' << a.status << (a.message.empty() ? "" : " (" + a.message + ")") << '\n';
    std::cout << "output: " << config.output_dir << '\n';
    return result.all_pass() ? kAllPass : kAuditFailure;
  } catch (const nevlab::cli::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nevlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAuditFailure;
  }
}
