#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hvscat/commands.hpp"

int main(int argc, char** argv) {
  using namespace hvs;
  CLI::App app{"High-velocity scattering experiments in a constant electric field"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out;
  int workers = 1;
  unsigned long long seed = 0;
  bool strict = false;
  app.add_option("--config", config_path, "configuration file (sectioned key = value)");
  app.add_option("--out", out, "output directory, overrides [output] dir");
  app.add_option("--workers", workers, "worker threads; 1 is bit-for-bit deterministic")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for randomly drawn probe lines");
  app.add_flag("--strict", strict, "reject unknown sections and keys");
  for (const auto& name : command_names()) app.add_subcommand(name, "run `" + name + "`");
  CLI11_PARSE(app, argc, argv);

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    RunContext ctx;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error("cannot read " + config_path);
      std::stringstream ss;
      ss << in.rdbuf();
      ParseOptions po;
      po.strict = strict;
      const ParseResult pr = parse_config(ss.str(), po);
      for (const auto& w : pr.warnings) std::cerr << "warning: " << w << "\n";
      ctx.config = pr.config;
    } else if (cmd != "radon-selftest") {
      throw Error("--config is required for `" + cmd + "`");
    }
    ctx.out = out;
    ctx.workers = workers;
    ctx.seed = seed;
    ctx.log = &std::cerr;
    return run_command(cmd, ctx);
  } catch (const Rejection& r) {
    std::cerr << "error: configuration rejected\n";
    for (const auto& v : r.violations)
      std::cerr << "  " << v.subject << ": " << v.bound << (v.detail.empty() ? "" : " (" + v.detail + ")") << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
