#include <iostream>
#include <map>

#include "CLI11.hpp"

#include "crossdiff/app.hpp"

int main(int argc, char** argv) {
  using namespace crossdiff;

  CLI::App app{"Truncated cross-diffusion solver, condition checker and aquifer scenarios"};
  app.require_subcommand(1);

  CommandOptions opt;
  std::vector<double> eps;
  std::uint64_t seed = 0;

  const std::map<std::string, std::string> help = {
      {"check", "evaluate the structural conditions of a scenario"},
      {"simulate", "run the truncated cross-diffusion system"},
      {"aquifer", "run the unconfined, penalized and confined aquifer models"},
      {"keulegan", "pumping run with interface dome and slope statistics"},
      {"probe", "twin-run uniqueness probe"},
      {"sweep", "penalized aquifer over a list of epsilons"},
      {"convergence", "refinement study against a reference solution"},
  };
  for (const std::string& verb : verbs()) {
    CLI::App* sub = app.add_subcommand(verb, help.at(verb));
    sub->add_option("--config", opt.config_path, "scenario config (JSON)")->required();
    sub->add_option("--out", opt.out_dir, "output directory")->required();
    sub->add_flag("--require-feasible", opt.require_feasible, "exit 3 if a condition check fails");
    sub->add_option("--epsilon-list", eps, "penalization parameters for the sweep")->expected(1, -1);
    sub->add_option("--seed", seed, "seed for noise fields");
    sub->add_flag("--timing", opt.timing, "record wall time in the manifest");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  opt.verb = chosen->get_name();
  if (chosen->count("--epsilon-list") > 0) opt.epsilons = eps;
  if (chosen->count("--seed") > 0) opt.seed = seed;
  return run_command(opt, std::cerr);
}
