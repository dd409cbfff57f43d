#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kirchhoff/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bifurcation experiments for the Kirchhoff problem -(a + b|grad u|^2) Laplace u = lambda f(u)"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  for (const std::string& name : kirchhoff::cli::subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config, "JSON experiment config")->required();
    sub->add_option("-s,--set", overrides, "override a config value, e.g. problem.a=0.5")
        ->allow_extra_args(false);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kirchhoff::cli::usage;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  return kirchhoff::cli::run_command(sub, config, overrides, std::cout, std::cerr);
}
