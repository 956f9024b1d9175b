#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "contactnh/commands.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("contactnh");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("ENGINE_LOG")) {
    const std::string v = level;
    if (v == "error") {
      spdlog::set_level(spdlog::level::err);
    } else if (v == "info") {
      spdlog::set_level(spdlog::level::info);
    } else if (v == "debug") {
      spdlog::set_level(spdlog::level::debug);
    } else {
      spdlog::warn("ignoring ENGINE_LOG={}, expected error, info or debug", v);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  namespace cli = contactnh::cli;

  CLI::App app{"Constrained contact Hamiltonian dynamics engine"};
  app.set_version_flag("--version", cli::engine_version());
  app.require_subcommand(1);

  std::string config, x0, out_dir = "out", f, g, point;
  int samples = 0;
  std::uint64_t seed = 0;

  auto* simulate = app.add_subcommand("simulate", "integrate a trajectory and write CSV + manifest");
  simulate->add_option("--config", config, "system config file")->required();
  simulate->add_option("--x0", x0, "initial state, 2n+1 comma-separated values")->required();
  simulate->add_option("--out", out_dir, "output directory");

  auto* verify = app.add_subcommand("verify", "run the invariant suite at sampled points of M");
  verify->add_option("--config", config, "system config file")->required();
  auto* samples_opt = verify->add_option("--samples", samples, "number of sample points");
  auto* seed_opt = verify->add_option("--seed", seed, "sampling seed");

  auto* bracket = app.add_subcommand("bracket", "evaluate the brackets of two functions at a point of M");
  bracket->add_option("--config", config, "system config file")->required();
  bracket->add_option("--f", f, "first function")->required();
  bracket->add_option("--g", g, "second function")->required();
  bracket->add_option("--point", point, "point on M, 2n+1 comma-separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitUsage;
  }

  contactnh::SystemConfig cfg;
  try {
    cfg = contactnh::load_config(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }

  if (*simulate) return cli::simulate(cfg, x0, out_dir, std::cerr);
  if (*verify) {
    if (samples_opt->count() == 0) samples = cfg.sample_count;
    if (seed_opt->count() == 0) seed = cfg.seed;
    if (samples < 1) {
      std::cerr << "error: --samples must be >= 1\n";
      return cli::kExitUsage;
    }
    return cli::verify(cfg, samples, seed, std::cout, std::cerr);
  }
  return cli::bracket(cfg, f, g, point, std::cout, std::cerr);
}
