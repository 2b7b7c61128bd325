#pragma once

// YAML output for certificates and reports, and gain-file input. Numbers are
// written with 17 significant digits so a write/read cycle is exact.

#include <optional>
#include <string>

#include "hinftrack/synthesis.hpp"

namespace hinftrack::cli {

std::string certificate_yaml(const SynthesisCertificate& cert);

/// Contents of a gain file: either a certificate (`certificate:` key) or a
/// bare gain (`gain: <matrix>`).
struct GainFile {
  Matrix F;
  std::optional<LmiVariables> variables;
  std::optional<LmiMargins> margins;  // as stored in the file
  std::optional<double> gamma;
  std::optional<double> lambda0;
};

/// Throws ConfigError on malformed input.
GainFile parse_gain_file(const std::string& text);
GainFile load_gain_file(const std::string& path);

std::string validation_yaml(const ValidationReport& topo, bool spanning_tree, bool detectable);
std::string spectrum_yaml(const StochasticDecomposition& dec, const FollowerSpectrum& spec);
std::string verification_yaml(const VerificationReport& decoupled, const VerificationReport& coupled,
                              const std::optional<LmiMargins>& margins = std::nullopt);
std::string gamma_search_yaml(const GammaSearch& gs);

}  // namespace hinftrack::cli
