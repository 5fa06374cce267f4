// zpf: zero-point fluctuation corrections for uniform MPS references.

#include "zpf/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Zero-point fluctuation corrections to uniform MPS ground-state energies"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = 0;
  bool no_cache = false;
  app.add_option("--config", config_path, "configuration file (key = value, [command] sections)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_flag("--no-cache", no_cache, "ignore and do not write cached saddles and references");

  for (const auto& name : zpf::command_names()) app.add_subcommand(name, "run " + name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : zpf::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  zpf::CommandContext ctx;
  ctx.log = &std::cerr;
  try {
    if (!config_path.empty()) ctx.config = zpf::RunConfig::load(config_path);
    ctx.seed = seed >= 0 ? static_cast<unsigned>(seed)
                         : static_cast<unsigned>(ctx.config.integer(command, "seed", 7));
    ctx.threads = threads > 0 ? threads : ctx.config.integer(command, "threads", 1);
    ctx.out_dir = !out_dir.empty() ? out_dir : ctx.config.str(command, "out_dir", "zpf-out");
    ctx.cache = !no_cache;
  } catch (const zpf::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return zpf::kExitConfig;
  }

  const auto res = zpf::run_command(command, ctx);
  for (const auto& f : res.outputs) std::cout << f << '\n';
  return res.exit_code;
}
