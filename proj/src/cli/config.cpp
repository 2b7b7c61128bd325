#include "hinftrack/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "demo_config.hpp"

namespace hinftrack::cli {

namespace {

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

void check_keys(const YAML::Node& node, const std::string& field, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(field, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(join(field, key), "unknown key");
  }
}

YAML::Node require(const YAML::Node& node, const std::string& key, const std::string& field) {
  const YAML::Node v = node[key];
  if (!v) throw ConfigError(join(field, key), "missing");
  return v;
}

double as_double(const YAML::Node& v, const std::string& field) {
  if (!v.IsScalar()) throw ConfigError(field, "expected a number");
  double d = 0.0;
  try {
    d = v.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, "expected a number, got '" + v.Scalar() + "'");
  }
  if (!std::isfinite(d)) throw ConfigError(field, "must be finite");
  return d;
}

long as_long(const YAML::Node& v, const std::string& field) {
  const double d = as_double(v, field);
  if (d != std::floor(d) || std::abs(d) > 9e15) throw ConfigError(field, "expected an integer");
  return static_cast<long>(d);
}

// Scalar → 1×1, flat list → column, list of rows → matrix.
Matrix as_matrix(const YAML::Node& v, const std::string& field) {
  if (v.IsScalar()) return Matrix(1, 1, as_double(v, field));
  if (!v.IsSequence() || v.size() == 0) throw ConfigError(field, "expected a number or a non-empty list");
  const bool nested = v[0].IsSequence();
  if (!nested) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = as_double(v[i], field + "[" + std::to_string(i) + "]");
    return m;
  }
  const std::size_t cols = v[0].size();
  if (cols == 0) throw ConfigError(field, "rows must not be empty");
  Matrix m(v.size(), cols);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string rf = field + "[" + std::to_string(i) + "]";
    if (!v[i].IsSequence()) throw ConfigError(rf, "expected a row list");
    if (v[i].size() != cols) {
      throw ConfigError(rf, "has " + std::to_string(v[i].size()) + " entries, expected " + std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = as_double(v[i][j], rf + "[" + std::to_string(j) + "]");
  }
  return m;
}

void require_shape(const Matrix& m, std::size_t r, std::size_t c, const std::string& field) {
  if (m.rows() != r || m.cols() != c) {
    throw ConfigError(field, "must be " + std::to_string(r) + " x " + std::to_string(c) + ", got " +
                                 std::to_string(m.rows()) + " x " + std::to_string(m.cols()));
  }
}

std::vector<Matrix> as_vector_list(const YAML::Node& v, std::size_t count, std::size_t rows, const std::string& field) {
  if (!v.IsSequence() || v.size() != count) {
    throw ConfigError(field, "expected a list of " + std::to_string(count) + " vectors");
  }
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    Matrix m = as_matrix(v[i], f);
    if (m.rows() == 1 && m.cols() == rows && rows > 1) m = m.transpose();
    require_shape(m, rows, 1, f);
    out.push_back(std::move(m));
  }
  return out;
}

void parse_leader(const YAML::Node& node, ProjectConfig& cfg) {
  const std::string f = "leader";
  check_keys(node, f, {"n", "m0", "A_hat", "A_hat_blocks"});
  const long n = as_long(require(node, "n", f), "leader.n");
  const long m0 = as_long(require(node, "m0", f), "leader.m0");
  if (n < 1) throw ConfigError("leader.n", "must be at least 1");
  if (m0 < 1) throw ConfigError("leader.m0", "must be at least 1");
  cfg.leader.blocks = static_cast<std::size_t>(n);
  cfg.leader.block_size = static_cast<std::size_t>(m0);
  const std::size_t d = cfg.leader.dim();
  const bool full = static_cast<bool>(node["A_hat"]);
  const bool blocks = static_cast<bool>(node["A_hat_blocks"]);
  if (full == blocks) throw ConfigError("leader.A_hat", "give exactly one of A_hat and A_hat_blocks");
  if (full) {
    cfg.leader.A_hat = as_matrix(node["A_hat"], "leader.A_hat");
    require_shape(cfg.leader.A_hat, d, d, "leader.A_hat");
    return;
  }
  const YAML::Node b = node["A_hat_blocks"];
  if (!b.IsSequence() || b.size() != cfg.leader.blocks) {
    throw ConfigError("leader.A_hat_blocks", "expected " + std::to_string(n) + " block rows");
  }
  cfg.leader.A_hat = Matrix(d, d);
  for (std::size_t s = 0; s < cfg.leader.blocks; ++s) {
    const std::string rf = "leader.A_hat_blocks[" + std::to_string(s) + "]";
    if (!b[s].IsSequence() || b[s].size() != cfg.leader.blocks) {
      throw ConfigError(rf, "expected " + std::to_string(n) + " blocks");
    }
    for (std::size_t j = 0; j < cfg.leader.blocks; ++j) {
      const std::string bf = rf + "[" + std::to_string(j) + "]";
      const Matrix blk = as_matrix(b[s][j], bf);
      require_shape(blk, cfg.leader.block_size, cfg.leader.block_size, bf);
      cfg.leader.A_hat.set_block(s * cfg.leader.block_size, j * cfg.leader.block_size, blk);
    }
  }
}

void parse_solver(const YAML::Node& node, ProjectConfig& cfg) {
  const std::string f = "solver";
  check_keys(node, f, {"method", "eps", "margin", "max_iterations", "restarts", "seed", "variable_bound"});
  SolverOptions& o = cfg.solver;
  if (node["method"]) {
    const auto m = node["method"].as<std::string>();
    if (m == "barrier") {
      o.method = SolverMethod::kBarrier;
    } else if (m == "subgradient") {
      o.method = SolverMethod::kSubgradient;
    } else {
      throw ConfigError("solver.method", "expected 'barrier' or 'subgradient', got '" + m + "'");
    }
  }
  if (node["eps"]) {
    if (node["eps"].IsScalar() && node["eps"].Scalar() == "free") {
      o.fixed_eps.reset();
    } else {
      const double e = as_double(node["eps"], "solver.eps");
      if (!(e > 0.0)) throw ConfigError("solver.eps", "must be positive or 'free'");
      o.fixed_eps = e;
    }
  }
  if (node["margin"]) {
    o.margin_target = as_double(node["margin"], "solver.margin");
    if (!(o.margin_target > 0.0)) throw ConfigError("solver.margin", "must be positive");
  }
  if (node["max_iterations"]) {
    const long it = as_long(node["max_iterations"], "solver.max_iterations");
    if (it < 1) throw ConfigError("solver.max_iterations", "must be at least 1");
    o.max_iterations = static_cast<int>(it);
  }
  if (node["restarts"]) {
    const long r = as_long(node["restarts"], "solver.restarts");
    if (r < 0) throw ConfigError("solver.restarts", "must be nonnegative");
    o.restarts = static_cast<int>(r);
  }
  if (node["seed"]) o.seed = static_cast<std::uint64_t>(as_long(node["seed"], "solver.seed"));
  if (node["variable_bound"]) {
    o.variable_bound = as_double(node["variable_bound"], "solver.variable_bound");
    if (!(o.variable_bound > 0.0)) throw ConfigError("solver.variable_bound", "must be positive");
  }
}

void parse_simulation(const YAML::Node& node, ProjectConfig& cfg, const std::string& base_dir) {
  const std::string f = "simulation";
  check_keys(node, f, {"horizon", "seed", "theta0", "x0", "z0", "disturbance"});
  SimConfig& s = cfg.simulation;
  const std::size_t followers = cfg.adjacency.followers();
  const std::size_t n = cfg.leader.blocks;
  const std::size_t m0 = cfg.leader.block_size;
  if (node["horizon"]) {
    s.horizon = as_long(node["horizon"], "simulation.horizon");
    if (s.horizon < 1) throw ConfigError("simulation.horizon", "must be at least 1");
  }
  if (node["seed"]) s.seed = static_cast<std::uint64_t>(as_long(node["seed"], "simulation.seed"));
  if (node["theta0"]) {
    Matrix t = as_matrix(node["theta0"], "simulation.theta0");
    if (t.rows() == 1 && t.cols() > 1) t = t.transpose();
    require_shape(t, n * m0, 1, "simulation.theta0");
    s.theta0 = t;
  }
  if (node["x0"]) s.x0 = as_vector_list(node["x0"], followers, m0, "simulation.x0");
  if (node["z0"]) s.z0 = as_vector_list(node["z0"], followers, (n - 1) * m0, "simulation.z0");
  if (const YAML::Node d = node["disturbance"]) {
    const std::string df = "simulation.disturbance";
    check_keys(d, df, {"kind", "amplitude", "window_end", "file"});
    const auto kind = require(d, "kind", df).as<std::string>();
    if (kind == "none") {
      s.disturbance.kind = DisturbanceKind::kNone;
    } else if (kind == "paper") {
      s.disturbance.kind = DisturbanceKind::kPaperSine;
    } else if (kind == "file") {
      s.disturbance.kind = DisturbanceKind::kTable;
    } else {
      throw ConfigError(df + ".kind", "expected none, paper or file, got '" + kind + "'");
    }
    if (d["amplitude"]) s.disturbance.amplitude = as_double(d["amplitude"], df + ".amplitude");
    if (d["window_end"]) {
      s.disturbance.window_end = as_long(d["window_end"], df + ".window_end");
      if (s.disturbance.window_end < 0) throw ConfigError(df + ".window_end", "must be nonnegative");
    }
    if (s.disturbance.kind == DisturbanceKind::kTable) {
      std::filesystem::path p = require(d, "file", df).as<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      try {
        s.disturbance.table = load_disturbance_table(p.string(), followers, cfg.follower.B_w.cols());
      } catch (const std::exception& e) {
        throw ConfigError(df + ".file", e.what());
      }
    }
  }
}

}  // namespace

ProjectConfig parse_config(const std::string& text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("", std::string("not valid YAML: ") + e.what());
  }
  check_keys(root, "", {"topology", "leader", "follower", "sensing", "performance", "solver", "simulation",
                        "reference_gain"});
  ProjectConfig cfg;

  const YAML::Node topo = require(root, "topology", "");
  check_keys(topo, "topology", {"adjacency", "h"});
  cfg.adjacency.weights = as_matrix(require(topo, "adjacency", "topology"), "topology.adjacency");
  if (!cfg.adjacency.weights.is_square() || cfg.adjacency.agents() < 2) {
    throw ConfigError("topology.adjacency", "must be square with at least two nodes (leader plus followers)");
  }
  cfg.h = as_double(require(topo, "h", "topology"), "topology.h");
  if (!(cfg.h > 0.0)) throw ConfigError("topology.h", "must be positive");

  parse_leader(require(root, "leader", ""), cfg);
  const std::size_t m0 = cfg.leader.block_size;
  const std::size_t d = cfg.leader.dim();

  const YAML::Node fol = require(root, "follower", "");
  check_keys(fol, "follower", {"A", "B_w"});
  cfg.follower.A = as_matrix(require(fol, "A", "follower"), "follower.A");
  require_shape(cfg.follower.A, m0, m0, "follower.A");
  cfg.follower.B_w = as_matrix(require(fol, "B_w", "follower"), "follower.B_w");
  if (cfg.follower.B_w.rows() != m0) {
    throw ConfigError("follower.B_w", "must have " + std::to_string(m0) + " rows");
  }

  const YAML::Node sen = require(root, "sensing", "");
  check_keys(sen, "sensing", {"E"});
  cfg.sensing.E = as_matrix(require(sen, "E", "sensing"), "sensing.E");
  if (cfg.sensing.E.cols() != m0) throw ConfigError("sensing.E", "must have " + std::to_string(m0) + " columns");
  if (cfg.sensing.E.rows() > m0) throw ConfigError("sensing.E", "must not have more rows than columns");

  const YAML::Node perf = require(root, "performance", "");
  check_keys(perf, "performance", {"C", "gamma"});
  cfg.C_perf = as_matrix(require(perf, "C", "performance"), "performance.C");
  if (cfg.C_perf.cols() != d) throw ConfigError("performance.C", "must have " + std::to_string(d) + " columns");
  cfg.gamma = as_double(require(perf, "gamma", "performance"), "performance.gamma");
  if (!(cfg.gamma > 0.0)) throw ConfigError("performance.gamma", "must be positive");

  if (root["solver"]) parse_solver(root["solver"], cfg);
  if (root["simulation"]) parse_simulation(root["simulation"], cfg, base_dir);
  if (root["reference_gain"]) {
    Matrix g = as_matrix(root["reference_gain"], "reference_gain");
    require_shape(g, d, cfg.sensing.E.rows(), "reference_gain");
    cfg.reference_gain = g;
  }
  (void)augmented(cfg);
  return cfg;
}

ProjectConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

AugmentedSystem augmented(const ProjectConfig& cfg) {
  try {
    return build_augmented(cfg.leader, cfg.follower, cfg.sensing, cfg.C_perf);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
}

std::vector<std::vector<Matrix>> load_disturbance_table(const std::string& path, std::size_t followers,
                                                        std::size_t mw) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read disturbance table '" + path + "'");
  std::vector<std::vector<std::optional<Matrix>>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> vals;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": '" + cell + "' is not a number");
      }
    }
    if (vals.size() != 2 + mw) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected k, node and " + std::to_string(mw) +
                               " values");
    }
    const double kd = vals[0], id = vals[1];
    if (kd < 0 || kd != std::floor(kd) || id < 2 || id != std::floor(id) || id > static_cast<double>(followers + 1)) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": bad step or node index");
    }
    const auto k = static_cast<std::size_t>(kd);
    const auto i = static_cast<std::size_t>(id) - 2;
    if (rows.size() <= k) rows.resize(k + 1, std::vector<std::optional<Matrix>>(followers));
    Matrix w(mw, 1);
    for (std::size_t c = 0; c < mw; ++c) w(c, 0) = vals[2 + c];
    rows[k][i] = w;
  }
  std::vector<std::vector<Matrix>> table(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < followers; ++i) {
      if (!rows[k][i]) {
        throw std::runtime_error("missing entry for step " + std::to_string(k) + ", node " + std::to_string(i + 2));
      }
      table[k].push_back(*rows[k][i]);
    }
  }
  return table;
}

const std::string& demo_config_text() {
  static const std::string text = kDemoConfigText;
  return text;
}

}  // namespace hinftrack::cli
