#pragma once

// Subcommands of the hinftrack tool. Each is a pure function of its options
// (config, flags, seed) to an exit code and files under the output directory.

#include <iosfwd>
#include <optional>
#include <string>

namespace hinftrack::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,      // usage or config error
  kExitValidation = 2,  // topology, spanning tree or detectability check failed
  kExitInfeasible = 3,  // synthesis found no certificate
  kExitVerify = 4,      // verification failed
  kExitNumerical = 5,   // numerical breakdown
};

struct Options {
  std::string config;  // empty: the built-in worked example
  std::string out;     // output directory; empty: print only
  std::string gain;    // gain or certificate file
  std::optional<double> gamma;
  std::optional<std::string> eps;           // number or "free"
  std::optional<long> seed;
  std::optional<long> horizon;
  std::optional<std::string> disturbance;   // none | paper | file
  std::optional<std::string> table;         // disturbance table for "file"
  bool bisect_gamma = false;
};

int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_spectrum(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_synthesize(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_demo(const Options& opt, std::ostream& out, std::ostream& err);

}  // namespace hinftrack::cli
