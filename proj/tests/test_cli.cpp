#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hinftrack/cli/commands.hpp"
#include "hinftrack/cli/config.hpp"
#include "hinftrack/cli/serialize.hpp"
#include "hinftrack/cli/svg_plot.hpp"
#include "support.hpp"

using namespace hinftrack;
using namespace hinftrack::cli;
namespace fs = std::filesystem;

namespace {

const std::string kDemoPath = std::string(HINFTRACK_SOURCE_DIR) + "/configs/demo.yaml";

std::string read(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("hinftrack_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << content;
    return p.string();
  }

 private:
  fs::path path_;
};

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

struct CmdResult {
  int code;
  std::string out, err;
};

template <typename F>
CmdResult run(F cmd, const Options& o) {
  std::ostringstream out, err;
  const int code = cmd(o, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Config, DemoFileMatchesBuiltInAndParses) {
  EXPECT_EQ(read(kDemoPath), demo_config_text());
  const ProjectConfig cfg = load_config(kDemoPath);
  EXPECT_EQ(cfg.adjacency.agents(), 5u);
  EXPECT_EQ(cfg.h, 0.2);
  EXPECT_EQ(cfg.leader.A_hat, (Matrix{{1, 0, 0}, {1, 1, 0}, {1, 1, 0.5}}));
  EXPECT_EQ(cfg.follower.B_w, Matrix{{1.5}});
  EXPECT_EQ(cfg.solver.fixed_eps, 0.25);
  EXPECT_EQ(cfg.gamma, 1.0);
  ASSERT_TRUE(cfg.reference_gain.has_value());
  EXPECT_EQ(*cfg.reference_gain, (Matrix{{0.0003}, {0.0551}, {0.4660}}));
  EXPECT_EQ(cfg.simulation.disturbance.kind, DisturbanceKind::kPaperSine);
}

TEST(Config, BlockFormOfLeaderMatrix) {
  const std::string text = replace(demo_config_text(),
                                   "  A_hat:                      # example\n    - [1.0, 0.0, 0.0]\n    - [1.0, 1.0, 0.0]\n    - [1.0, 1.0, 0.5]\n",
                                   "  A_hat_blocks: [[1, 0, 0], [1, 1, 0], [1, 1, 0.5]]\n");
  EXPECT_EQ(parse_config(text).leader.A_hat, (Matrix{{1, 0, 0}, {1, 1, 0}, {1, 1, 0.5}}));
}

TEST(Config, JsonSubsetIsAccepted) {
  const std::string json = R"({"topology": {"h": 0.5, "adjacency": [[0, 0], [1, 0]]},
    "leader": {"n": 1, "m0": 1, "A_hat": [[0.9]]}, "follower": {"A": [[0.1]], "B_w": [[1]]},
    "sensing": {"E": [[1]]}, "performance": {"C": [[1]], "gamma": 2}})";
  const ProjectConfig cfg = parse_config(json);
  EXPECT_EQ(cfg.gamma, 2.0);
  EXPECT_EQ(cfg.leader.blocks, 1u);
}

TEST(Config, ErrorsNameTheField) {
  auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<no error>");
  };
  const std::string demo = demo_config_text();
  EXPECT_EQ(field_of(replace(demo, "h: 0.20 ", "h: 0 ")), "topology.h");
  EXPECT_EQ(field_of(replace(demo, "B_w: 1.5 ", "B_w: [[1.5], [2.0]] ")), "follower.B_w");
  EXPECT_EQ(field_of(replace(demo, "gamma: 1.0 ", "gamma: -1 ")), "performance.gamma");
  EXPECT_EQ(field_of(replace(demo, "    - [1.0, 1.0, 0.5]\n", "    - [1.0, 1.0]\n")), "leader.A_hat[2]");
  EXPECT_EQ(field_of(replace(demo, "eps: 0.25 ", "eps: often ")), "solver.eps");
  EXPECT_EQ(field_of(replace(demo, "horizon: 400", "horizon: 0")), "simulation.horizon");
  EXPECT_EQ(field_of(replace(demo, "kind: paper ", "kind: loud ")), "simulation.disturbance.kind");
  EXPECT_EQ(field_of(replace(demo, "reference_gain: [0.0003, 0.0551, 0.4660]", "reference_gain: [1, 2]")),
            "reference_gain");
  EXPECT_EQ(field_of(demo + "extra: 1\n"), "extra");
  EXPECT_EQ(field_of("topology: [\n"), "");
}

TEST(Config, DisturbanceTable) {
  TempDir dir;
  const std::string path = dir.file("w.csv", "# k,node,w\n0,2,1.5\n0,3,-1\n1,3,2\n1,2,0\n");
  const auto t = load_disturbance_table(path, 2, 1);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0][1](0, 0), -1.0);
  EXPECT_EQ(t[1][1](0, 0), 2.0);
  EXPECT_THROW(load_disturbance_table(dir.file("bad.csv", "0,2,1\n1,2,1\n"), 2, 1), std::runtime_error);
  EXPECT_THROW(load_disturbance_table(dir.file("bad2.csv", "0,1,1\n"), 1, 1), std::runtime_error);
  EXPECT_THROW(load_disturbance_table(dir.file("bad3.csv", "0,2,x\n"), 1, 1), std::runtime_error);
}

TEST(Serialize, CertificateRoundTripReproducesMargins) {
  const auto ex = testsupport::worked_example();
  SolverOptions opts;
  opts.fixed_eps = 0.25;
  const auto out = solve_feasibility(ex.aug, 1.0, ex.spec.lambda0, opts);
  ASSERT_TRUE(out.feasible());
  const auto& cert = *out.certificate;
  const GainFile g = parse_gain_file(certificate_yaml(cert));
  ASSERT_TRUE(g.variables.has_value());
  EXPECT_EQ(g.F, cert.gain.matrix());
  EXPECT_EQ(g.variables->P, cert.variables.P);
  EXPECT_EQ(g.variables->V, cert.variables.V);
  const auto m = lmi_margins(*g.variables, *g.gamma, *g.lambda0, ex.aug);
  EXPECT_NEAR(m.lmi12, cert.margins.lmi12, 1e-12);
  EXPECT_NEAR(m.lmi13, cert.margins.lmi13, 1e-12);
  EXPECT_NEAR(m.P, cert.margins.P, 1e-12);
  EXPECT_NEAR(g.margins->lmi12, cert.margins.lmi12, 1e-12);
}

TEST(Serialize, BareGainFile) {
  const GainFile g = parse_gain_file("gain: [0.1, 0.2, 0.3]\n");
  EXPECT_EQ(g.F, (Matrix{{0.1}, {0.2}, {0.3}}));
  EXPECT_FALSE(g.variables.has_value());
  EXPECT_THROW(parse_gain_file("nothing: 1\n"), ConfigError);
}

TEST(SvgPlot, ProducesWellFormedDocument) {
  const std::string svg = svg_line_plot({"E & co", "k", "E", true}, {{"E", {1.0, 0.1, 0.0, 0.001}}, {"F", {}}});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("E &amp; co"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

TEST(Commands, ValidateExitCodes) {
  TempDir dir;
  Options o;
  o.config = kDemoPath;
  EXPECT_EQ(run(cmd_validate, o).code, kExitOk);

  const std::string demo = demo_config_text();
  o.config = dir.file("asym.yaml", replace(demo, "    - [0.0, 2.0, 0.0, 0.0, 0.0]", "    - [0.0, 2.5, 0.0, 0.0, 0.0]"));
  const CmdResult asym = run(cmd_validate, o);
  EXPECT_EQ(asym.code, kExitValidation);
  EXPECT_NE(asym.out.find("a(2,3)"), std::string::npos);

  std::string disc = replace(demo, "    - [1.5, 0.0, 0.0, 0.0, 1.9]", "    - [0.0, 0.0, 0.0, 0.0, 1.9]");
  o.config = dir.file("disc.yaml", disc);
  const CmdResult d = run(cmd_validate, o);
  EXPECT_EQ(d.code, kExitValidation);
  EXPECT_NE(d.out.find("spanning tree: missing"), std::string::npos);

  o.config = (dir.path() / "missing.yaml").string();
  EXPECT_EQ(run(cmd_validate, o).code, kExitConfig);
}

TEST(Commands, Spectrum) {
  Options o;
  o.config = kDemoPath;
  const CmdResult r = run(cmd_spectrum, o);
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("lambda0: 0.85779480605"), std::string::npos);

  TempDir dir;
  o.config = dir.file("one.yaml", replace(replace(replace(demo_config_text(), "    - [0.0, 0.0, 0.0, 0.0, 0.0]\n    - [1.2, 0.0, 2.0, 0.0, 0.0]\n    - [0.0, 2.0, 0.0, 0.0, 0.0]\n    - [1.5, 0.0, 0.0, 0.0, 1.9]\n    - [0.0, 0.0, 0.0, 1.9, 0.0]\n",
                                                  "    - [0, 0]\n    - [2, 0]\n"),
                                          "h: 0.20 ", "h: 0.5 "),
                                  "  disturbance:", "  disturbance_unused:"));
  // Unknown key rejected with the field name.
  EXPECT_EQ(run(cmd_spectrum, o).code, kExitConfig);
  o.config = dir.file("one_ok.yaml", replace(replace(demo_config_text(), "    - [0.0, 0.0, 0.0, 0.0, 0.0]\n    - [1.2, 0.0, 2.0, 0.0, 0.0]\n    - [0.0, 2.0, 0.0, 0.0, 0.0]\n    - [1.5, 0.0, 0.0, 0.0, 1.9]\n    - [0.0, 0.0, 0.0, 1.9, 0.0]\n",
                                                     "    - [0, 0]\n    - [2, 0]\n"),
                                             "h: 0.20 ", "h: 0.5 "));
  const CmdResult one = run(cmd_spectrum, o);
  EXPECT_EQ(one.code, kExitOk);
  EXPECT_NE(one.out.find("eigenvalues = [0.20000000000000001]"), std::string::npos) << one.out;

  o.config = dir.file("h0.yaml", replace(demo_config_text(), "h: 0.20 ", "h: 0 "));
  EXPECT_EQ(run(cmd_spectrum, o).code, kExitConfig);
}

TEST(Commands, SynthesizeVerifyRoundTrip) {
  TempDir dir;
  Options o;
  o.config = kDemoPath;
  o.out = dir.path().string();
  const CmdResult s = run(cmd_synthesize, o);
  ASSERT_EQ(s.code, kExitOk) << s.err;
  const std::string cert = (dir.path() / "certificate.yaml").string();
  ASSERT_TRUE(fs::exists(cert));
  Options v;
  v.config = kDemoPath;
  v.gain = cert;
  const CmdResult r = run(cmd_verify, v);
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("largest difference from stored margins: 0"), std::string::npos) << r.out;

  o.gamma = 1e-9;
  EXPECT_EQ(run(cmd_synthesize, o).code, kExitInfeasible);
}

TEST(Commands, VerifyOutcomes) {
  TempDir dir;
  Options v;
  v.config = kDemoPath;
  v.gain = dir.file("reference.yaml", "gain: [0.0003, 0.0551, 0.4660]\n");
  EXPECT_EQ(run(cmd_verify, v).code, kExitOk);
  v.gain = dir.file("zero.yaml", "gain: [0, 0, 0]\n");
  const CmdResult z = run(cmd_verify, v);
  EXPECT_EQ(z.code, kExitVerify);
  EXPECT_NE(z.out.find("NOT Schur"), std::string::npos);
  v.gain = dir.file("big.yaml", "gain: [0.3, 55.1, 466.0]\n");
  const CmdResult big = run(cmd_verify, v);
  EXPECT_TRUE(big.code == kExitOk || big.code == kExitVerify);
  for (int i = 1; i <= 4; ++i) EXPECT_NE(big.out.find("system " + std::to_string(i)), std::string::npos);
  v.gain = dir.file("wrong.yaml", "gain: [1, 2]\n");
  EXPECT_EQ(run(cmd_verify, v).code, kExitConfig);
}

TEST(Commands, SimulateWritesArtifacts) {
  TempDir dir;
  Options o;
  o.config = kDemoPath;
  o.out = dir.path().string();
  o.horizon = 60;
  const CmdResult r = run(cmd_simulate, o);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("energy bound at every prefix: holds"), std::string::npos);
  for (const char* f : {"trajectory.csv", "tracking_error.svg", "energy.svg", "states_block_1.svg",
                        "states_block_3.svg", "summary.yaml"})
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  o.horizon = 0;
  EXPECT_EQ(run(cmd_simulate, o).code, kExitConfig);
  o.horizon = 10;
  o.disturbance = "file";
  EXPECT_EQ(run(cmd_simulate, o).code, kExitConfig);
  o.table = dir.file("short.csv", "0,2,1\n0,3,1\n0,4,1\n0,5,1\n");
  EXPECT_EQ(run(cmd_simulate, o).code, kExitConfig);  // table shorter than the horizon
}

TEST(Commands, DemoIsDeterministic) {
  TempDir a, b;
  Options o;
  o.out = a.path().string();
  const CmdResult first = run(cmd_demo, o);
  ASSERT_EQ(first.code, kExitOk) << first.out << first.err;
  o.out = b.path().string();
  ASSERT_EQ(run(cmd_demo, o).code, kExitOk);
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a.path())) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a.path());
    EXPECT_EQ(read(entry.path()), read(b.path() / rel)) << rel;
    compared += entry.path().extension() == ".csv";
  }
  EXPECT_EQ(compared, 4);
}
