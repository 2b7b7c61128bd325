// hinftrack: validate, analyse, synthesize, verify and simulate leader
// tracking protocols from a YAML project file.

#include <CLI11.hpp>

#include <iostream>

#include "hinftrack/cli/commands.hpp"

namespace cli = hinftrack::cli;

int main(int argc, char** argv) {
  CLI::App app{"Distributed H-infinity leader tracking: analysis, gain synthesis and simulation"};
  app.require_subcommand(1);
  cli::Options opt;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Project YAML file (default: built-in worked example)");
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", opt.out, "Output directory"); };
  auto add_gamma = [&](CLI::App* sub) { sub->add_option("--gamma", opt.gamma, "Attenuation level (overrides config)"); };

  auto* validate = app.add_subcommand("validate", "Check topology, spanning tree and detectability");
  add_config(validate);
  add_out(validate);

  auto* spectrum = app.add_subcommand("spectrum", "Print the stochastic decomposition and its spectrum");
  add_config(spectrum);
  add_out(spectrum);

  auto* synth = app.add_subcommand("synthesize", "Search for a protocol gain certificate");
  add_config(synth);
  add_out(synth);
  add_gamma(synth);
  synth->add_option("--eps", opt.eps, "Fix epsilon to a positive number, or 'free'");
  synth->add_flag("--bisect-gamma", opt.bisect_gamma, "Bisect for the smallest feasible gamma");

  auto* verify = app.add_subcommand("verify", "Verify a gain on the decoupled and coupled systems");
  add_config(verify);
  add_out(verify);
  add_gamma(verify);
  verify->add_option("--gain", opt.gain, "Gain or certificate file")->required();

  auto* sim = app.add_subcommand("simulate", "Simulate the closed loop and write CSV and plots");
  add_config(sim);
  add_out(sim);
  add_gamma(sim);
  sim->add_option("--gain", opt.gain, "Gain or certificate file (default: reference_gain from the config)");
  sim->add_option("--disturbance", opt.disturbance, "none, paper or file")
      ->check(CLI::IsMember({"none", "paper", "file"}));
  sim->add_option("--table", opt.table, "Disturbance table for --disturbance file");
  sim->add_option("--horizon", opt.horizon, "Number of steps");
  sim->add_option("--seed", opt.seed, "Seed for random initial states");

  auto* demo = app.add_subcommand("demo", "Run the full pipeline on the worked example");
  add_config(demo);
  demo->add_option("--out", opt.out, "Output directory (default: demo_output)");
  demo->add_option("--seed", opt.seed, "Seed for random initial states");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitConfig;
  }

  auto& out = std::cout;
  auto& err = std::cerr;
  if (*validate) return cli::cmd_validate(opt, out, err);
  if (*spectrum) return cli::cmd_spectrum(opt, out, err);
  if (*synth) return cli::cmd_synthesize(opt, out, err);
  if (*verify) return cli::cmd_verify(opt, out, err);
  if (*sim) return cli::cmd_simulate(opt, out, err);
  if (*demo) return cli::cmd_demo(opt, out, err);
  return cli::kExitConfig;
}
