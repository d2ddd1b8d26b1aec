#include "moltrap/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char **argv) {
  CLI::App app{"moltrap: light shifts, magic conditions and hyperfine maps of polar diatomics"};
  app.require_subcommand(1, 1);

  moltrap::cli::RunOptions opts;
  std::string out = ".";
  const std::map<std::string, std::string> about = {
      {"solve-rovib", "rovibrational levels and linewidths of the surrogate curves"},
      {"alpha-scan", "closed-form polarizability versus detuning"},
      {"imag-scan", "imaginary polarizability versus photon energy"},
      {"hyperfine-scan", "tracked hyperfine polarizability curves versus polarisation angle"},
      {"magic-find", "magic detunings or magic polarisation angles"},
      {"calibrate", "linewidth that places a crossing at a target detuning"},
  };
  for (const auto &name : moltrap::cli::subcommands()) {
    auto *sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", opts.config, "INI configuration file")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", opts.threads, "worker threads for scans");
    sub->add_option("--override", opts.overrides, "section.key=value, repeatable");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return moltrap::cli::exit_config;
  }
  opts.subcommand = app.get_subcommands().front()->get_name();
  opts.out = out;
  return moltrap::cli::run(opts, std::cout, std::cerr);
}
