#include "hinftrack/cli/serialize.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "hinftrack/cli/config.hpp"

namespace hinftrack::cli {

namespace {

YAML::Emitter& new_emitter(YAML::Emitter& out) {
  out.SetDoublePrecision(17);
  out.SetSeqFormat(YAML::Block);
  return out;
}

void emit_double(YAML::Emitter& out, double v) {
  if (std::isinf(v)) {
    out << (v > 0 ? ".inf" : "-.inf");
  } else if (std::isnan(v)) {
    out << ".nan";
  } else {
    out << v;
  }
}

void emit_matrix(YAML::Emitter& out, const Matrix& m) {
  out << YAML::BeginSeq;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << YAML::Flow << YAML::BeginSeq;
    for (std::size_t j = 0; j < m.cols(); ++j) emit_double(out, m(i, j));
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

void emit_margins(YAML::Emitter& out, const LmiMargins& m) {
  out << YAML::BeginMap;
  out << YAML::Key << "lmi12" << YAML::Value;
  emit_double(out, m.lmi12);
  out << YAML::Key << "lmi13" << YAML::Value;
  emit_double(out, m.lmi13);
  out << YAML::Key << "P" << YAML::Value;
  emit_double(out, m.P);
  out << YAML::Key << "eps" << YAML::Value;
  emit_double(out, m.eps);
  out << YAML::EndMap;
}

void emit_report(YAML::Emitter& out, const VerificationReport& r) {
  out << YAML::BeginMap;
  out << YAML::Key << "gamma" << YAML::Value << r.gamma;
  out << YAML::Key << "pass" << YAML::Value << r.pass;
  out << YAML::Key << "max_norm" << YAML::Value;
  emit_double(out, r.max_norm);
  out << YAML::Key << "margin" << YAML::Value;
  emit_double(out, r.margin);
  if (r.has_cross_check) {
    out << YAML::Key << "decoupled_max_norm" << YAML::Value;
    emit_double(out, r.decoupled_max_norm);
    out << YAML::Key << "cross_check_ok" << YAML::Value << r.cross_check_ok;
  }
  out << YAML::Key << "systems" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : r.systems) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "schur" << YAML::Value << s.schur;
    out << YAML::Key << "spectral_radius" << YAML::Value;
    emit_double(out, s.spectral_radius);
    out << YAML::Key << "hinf_norm" << YAML::Value;
    emit_double(out, s.hinf_norm);
    out << YAML::Key << "peak_frequency" << YAML::Value;
    emit_double(out, s.peak_frequency);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
}

Matrix read_matrix(const YAML::Node& v, const std::string& field) {
  try {
    if (v.IsScalar()) return Matrix(1, 1, v.as<double>());
    if (!v.IsSequence() || v.size() == 0) throw ConfigError(field, "expected a matrix");
    if (!v[0].IsSequence()) {
      Matrix m(v.size(), 1);
      for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i].as<double>();
      return m;
    }
    Matrix m(v.size(), v[0].size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].size() != m.cols()) throw ConfigError(field, "rows differ in length");
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = v[i][j].as<double>();
    }
    return m;
  } catch (const YAML::Exception& e) {
    throw ConfigError(field, e.what());
  }
}

double read_double(const YAML::Node& v, const std::string& field) {
  if (!v) throw ConfigError(field, "missing");
  try {
    return v.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, "expected a number");
  }
}

}  // namespace

std::string certificate_yaml(const SynthesisCertificate& cert) {
  YAML::Emitter out;
  new_emitter(out);
  out << YAML::BeginMap << YAML::Key << "certificate" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "gamma" << YAML::Value << cert.gamma;
  out << YAML::Key << "lambda0" << YAML::Value << cert.lambda0;
  out << YAML::Key << "eps" << YAML::Value << cert.variables.eps;
  out << YAML::Key << "P" << YAML::Value;
  emit_matrix(out, cert.variables.P);
  out << YAML::Key << "V" << YAML::Value;
  emit_matrix(out, cert.variables.V);
  out << YAML::Key << "F" << YAML::Value;
  emit_matrix(out, cert.gain.matrix());
  out << YAML::Key << "margins" << YAML::Value;
  emit_margins(out, cert.margins);
  out << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

GainFile parse_gain_file(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("", std::string("gain file is not valid YAML: ") + e.what());
  }
  GainFile g;
  if (root.IsMap() && root["certificate"]) {
    const YAML::Node c = root["certificate"];
    if (!c["F"]) throw ConfigError("certificate.F", "missing");
    g.F = read_matrix(c["F"], "certificate.F");
    if (c["P"] && c["V"]) {
      LmiVariables v;
      v.P = read_matrix(c["P"], "certificate.P");
      v.V = read_matrix(c["V"], "certificate.V");
      v.eps = read_double(c["eps"], "certificate.eps");
      g.variables = v;
    }
    if (c["gamma"]) g.gamma = read_double(c["gamma"], "certificate.gamma");
    if (c["lambda0"]) g.lambda0 = read_double(c["lambda0"], "certificate.lambda0");
    if (const YAML::Node m = c["margins"]) {
      LmiMargins mm;
      mm.lmi12 = read_double(m["lmi12"], "certificate.margins.lmi12");
      mm.lmi13 = read_double(m["lmi13"], "certificate.margins.lmi13");
      mm.P = read_double(m["P"], "certificate.margins.P");
      mm.eps = read_double(m["eps"], "certificate.margins.eps");
      g.margins = mm;
    }
    return g;
  }
  if (root.IsMap() && root["gain"]) {
    g.F = read_matrix(root["gain"], "gain");
    return g;
  }
  throw ConfigError("", "gain file needs a 'certificate' or a 'gain' key");
}

GainFile load_gain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read gain file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_gain_file(ss.str());
}

std::string validation_yaml(const ValidationReport& topo, bool spanning_tree, bool detectable) {
  YAML::Emitter out;
  new_emitter(out);
  out << YAML::BeginMap;
  out << YAML::Key << "topology_valid" << YAML::Value << topo.valid();
  out << YAML::Key << "violations" << YAML::Value << YAML::BeginSeq;
  for (const auto& v : topo.violations) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(v.kind);
    out << YAML::Key << "i" << YAML::Value << v.i;
    out << YAML::Key << "j" << YAML::Value << v.j;
    out << YAML::Key << "message" << YAML::Value << v.message;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "spanning_tree" << YAML::Value << spanning_tree;
  out << YAML::Key << "detectable" << YAML::Value << detectable;
  out << YAML::Key << "pass" << YAML::Value << (topo.valid() && spanning_tree && detectable);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string spectrum_yaml(const StochasticDecomposition& dec, const FollowerSpectrum& spec) {
  YAML::Emitter out;
  new_emitter(out);
  out << YAML::BeginMap;
  out << YAML::Key << "h" << YAML::Value << dec.h;
  out << YAML::Key << "kappa0" << YAML::Value << dec.kappa0;
  out << YAML::Key << "kappa" << YAML::Value << dec.kappa;
  out << YAML::Key << "delta" << YAML::Value << YAML::Flow << dec.delta;
  out << YAML::Key << "D_follower" << YAML::Value;
  emit_matrix(out, dec.D_follower);
  out << YAML::Key << "eigenvalues" << YAML::Value << YAML::Flow << spec.lambda;
  out << YAML::Key << "lambda0" << YAML::Value << spec.lambda0;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string verification_yaml(const VerificationReport& decoupled, const VerificationReport& coupled,
                              const std::optional<LmiMargins>& margins) {
  YAML::Emitter out;
  new_emitter(out);
  out << YAML::BeginMap;
  out << YAML::Key << "pass" << YAML::Value << (decoupled.pass && coupled.pass);
  if (margins) {
    out << YAML::Key << "lmi_margins" << YAML::Value;
    emit_margins(out, *margins);
  }
  out << YAML::Key << "decoupled" << YAML::Value;
  emit_report(out, decoupled);
  out << YAML::Key << "coupled" << YAML::Value;
  emit_report(out, coupled);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string gamma_search_yaml(const GammaSearch& gs) {
  YAML::Emitter out;
  new_emitter(out);
  out << YAML::BeginMap;
  out << YAML::Key << "lower" << YAML::Value << gs.lower;
  out << YAML::Key << "upper" << YAML::Value << gs.upper;
  out << YAML::Key << "log" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : gs.log) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "gamma" << YAML::Value << s.gamma << YAML::Key
        << "feasible" << YAML::Value << s.feasible << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace hinftrack::cli
