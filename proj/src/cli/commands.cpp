#include "hinftrack/cli/commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include "hinftrack/cli/config.hpp"
#include "hinftrack/cli/serialize.hpp"
#include "hinftrack/cli/svg_plot.hpp"
#include "hinftrack/error.hpp"
#include "hinftrack/simulation.hpp"

namespace hinftrack::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kDecayThreshold = 1e-6;

// Non-zero exit raised from inside a command.
struct Failure {
  int code;
  std::string message;
};

ProjectConfig load(const Options& opt) {
  ProjectConfig cfg = opt.config.empty() ? parse_config(demo_config_text()) : load_config(opt.config);
  if (opt.gamma) {
    if (!(*opt.gamma > 0.0)) throw ConfigError("--gamma", "must be positive");
    cfg.gamma = *opt.gamma;
  }
  if (opt.eps) {
    if (*opt.eps == "free") {
      cfg.solver.fixed_eps.reset();
    } else {
      double e = 0.0;
      try {
        e = std::stod(*opt.eps);
      } catch (const std::exception&) {
        throw ConfigError("--eps", "expected a number or 'free'");
      }
      if (!(e > 0.0)) throw ConfigError("--eps", "must be positive");
      cfg.solver.fixed_eps = e;
    }
  }
  if (opt.seed) cfg.simulation.seed = static_cast<std::uint64_t>(*opt.seed);
  if (opt.horizon) {
    if (*opt.horizon < 1) throw ConfigError("--horizon", "must be at least 1");
    cfg.simulation.horizon = *opt.horizon;
  }
  if (opt.disturbance) {
    const std::string& d = *opt.disturbance;
    if (d == "none") {
      cfg.simulation.disturbance.kind = DisturbanceKind::kNone;
    } else if (d == "paper") {
      cfg.simulation.disturbance.kind = DisturbanceKind::kPaperSine;
    } else if (d == "file") {
      if (opt.table) {
        cfg.simulation.disturbance.table =
            load_disturbance_table(*opt.table, cfg.adjacency.followers(), cfg.follower.B_w.cols());
      } else if (cfg.simulation.disturbance.table.empty()) {
        throw ConfigError("--disturbance", "'file' needs --table or simulation.disturbance.file");
      }
      cfg.simulation.disturbance.kind = DisturbanceKind::kTable;
    } else {
      throw ConfigError("--disturbance", "expected none, paper or file");
    }
  }
  return cfg;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  const fs::path p = fs::path(dir) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << content;
}

struct Pipeline {
  ProjectConfig cfg;
  AugmentedSystem aug;
  StochasticDecomposition dec;
  FollowerSpectrum spec;
};

struct Validation {
  ValidationReport topo;
  bool tree = false;
  bool detectable = false;
  bool pass() const { return topo.valid() && tree && detectable; }
};

Validation run_validation(const ProjectConfig& cfg, const AugmentedSystem& aug) {
  Validation v;
  v.topo = validate(cfg.adjacency);
  v.tree = has_leader_spanning_tree(cfg.adjacency);
  v.detectable = pbh_detectable(aug.leader.A_hat, aug.C_tilde);
  return v;
}

void print_validation(std::ostream& out, const Validation& v) {
  fmt::print(out, "topology:      {}\n", v.topo.valid() ? "ok" : "invalid");
  for (const auto& viol : v.topo.violations) fmt::print(out, "  - {}\n", viol.message);
  fmt::print(out, "spanning tree: {}\n", v.tree ? "ok" : "missing (some follower is not reachable from the leader)");
  fmt::print(out, "detectable:    {}\n", v.detectable ? "yes" : "no");
}

// Loads the config and checks the topology; throws Failure on a failed check.
Pipeline prepare(const Options& opt, std::ostream& out, bool quiet = true) {
  Pipeline p{load(opt), {}, {}, {}};
  p.aug = augmented(p.cfg);
  const Validation v = run_validation(p.cfg, p.aug);
  if (!quiet || !v.pass()) print_validation(out, v);
  if (!v.topo.valid() || !v.tree) throw Failure{kExitValidation, "topology check failed"};
  p.dec = build_stochastic(p.cfg.adjacency, p.cfg.h);
  p.spec = follower_spectrum(p.dec);
  return p;
}

void print_report(std::ostream& out, const std::string& name, const VerificationReport& r) {
  fmt::print(out, "{} (gamma = {}): {}\n", name, r.gamma, r.pass ? "pass" : "FAIL");
  for (std::size_t i = 0; i < r.systems.size(); ++i) {
    const auto& s = r.systems[i];
    fmt::print(out, "  system {}: spectral radius {:.9f} {}, Hinf norm {:.9g}\n", i + 1, s.spectral_radius,
               s.schur ? "(Schur)" : "(NOT Schur)", s.hinf_norm);
  }
  fmt::print(out, "  max norm {:.9g}, margin {:.9g}\n", r.max_norm, r.margin);
  if (r.has_cross_check) {
    fmt::print(out, "  decoupled max {:.9g}, agreement {}\n", r.decoupled_max_norm, r.cross_check_ok ? "ok" : "FAILED");
  }
}

struct SimSummary {
  double final_E = 0.0;
  std::optional<long> settling;
  bool energy_ok = true;
  long first_energy_violation = -1;
  double max_energy_ratio = 0.0;
};

SimSummary run_simulation(const Pipeline& p, const ProtocolGain& gain, const SimConfig& sc, const std::string& dir,
                          const std::string& title) {
  const Trajectories tr = simulate(p.cfg.adjacency, p.dec, p.aug, gain, sc);
  const auto E = tracking_error(tr);
  const auto en = energy_curves(tr, p.cfg.gamma);
  SimSummary s;
  s.final_E = E.back();
  s.settling = settling_step(E, kDecayThreshold);
  for (std::size_t k = 0; k < en.output.size(); ++k) {
    if (en.disturbance[k] > 0.0) s.max_energy_ratio = std::max(s.max_energy_ratio, en.output[k] / en.disturbance[k]);
    if (en.output[k] > en.disturbance[k] && s.energy_ok) {
      s.energy_ok = false;
      s.first_energy_violation = static_cast<long>(k);
    }
  }
  if (dir.empty()) return s;

  write_file(dir, "trajectory.csv", trajectories_csv(tr, p.cfg.gamma));
  const std::size_t n = p.aug.leader.blocks, m0 = p.aug.m0();
  const std::size_t f = p.cfg.adjacency.followers();
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t c = 0; c < m0; ++c) {
      const std::size_t row = b * m0 + c;
      std::vector<PlotSeries> series;
      PlotSeries th{fmt::format("theta_{}", row + 1), {}};
      for (const auto& t : tr.theta) th.y.push_back(t[row]);
      series.push_back(std::move(th));
      for (std::size_t i = 0; i < f; ++i) {
        PlotSeries z{b + 1 < n ? fmt::format("z_{}^{}", i + 2, b + 1) : fmt::format("x_{}", i + 2), {}};
        for (const auto& zk : tr.zeta) z.y.push_back(zk[i][row]);
        series.push_back(std::move(z));
      }
      const std::string name = m0 == 1 ? fmt::format("states_block_{}.svg", b + 1)
                                       : fmt::format("states_block_{}_{}.svg", b + 1, c + 1);
      write_file(dir, name,
                 svg_line_plot({fmt::format("{}: block {} and its estimates", title, b + 1), "k", "state", false},
                               series));
    }
  }
  write_file(dir, "tracking_error.svg",
             svg_line_plot({title + ": tracking error E(k)", "k", "E(k)", true}, {{"E(k)", E}}));
  write_file(dir, "energy.svg",
             svg_line_plot({title + ": cumulative energies", "k", "energy", false},
                           {{"sum |e|^2", en.output}, {"gamma^2 sum |w|^2", en.disturbance}}));

  std::string summary = fmt::format("final_E: {:.17g}\n", s.final_E);
  summary += s.settling ? fmt::format("settling_step: {}\n", *s.settling) : "settling_step: null\n";
  summary += fmt::format("energy_bound_holds: {}\nmax_energy_ratio: {:.17g}\n", s.energy_ok, s.max_energy_ratio);
  write_file(dir, "summary.yaml", summary);
  return s;
}

ProtocolGain gain_from(const Options& opt, const Pipeline& p, std::optional<GainFile>* file = nullptr) {
  if (!opt.gain.empty()) {
    GainFile g = load_gain_file(opt.gain);
    ProtocolGain gain(p.aug, g.F);
    if (file) *file = std::move(g);
    return gain;
  }
  if (p.cfg.reference_gain) return ProtocolGain(p.aug, *p.cfg.reference_gain);
  throw ConfigError("--gain", "no gain file given and the config has no reference_gain");
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const Failure& f) {
    fmt::print(err, "error: {}\n", f.message);
    return f.code;
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitConfig;
  }
}

int synthesis_exit(const SynthesisOutcome& o) {
  switch (o.status) {
    case SynthesisStatus::kFeasible: return kExitOk;
    case SynthesisStatus::kNotFound: return kExitInfeasible;
    case SynthesisStatus::kNumericalBreakdown: return kExitNumerical;
  }
  return kExitNumerical;
}

}  // namespace

int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(
      [&]() -> int {
        const ProjectConfig cfg = load(opt);
        const AugmentedSystem aug = augmented(cfg);
        const Validation v = run_validation(cfg, aug);
        print_validation(out, v);
        const std::string y = validation_yaml(v.topo, v.tree, v.detectable);
        write_file(opt.out, "validation.yaml", y);
        fmt::print(out, "---\n{}", y);
        return v.pass() ? kExitOk : kExitValidation;
      },
      err);
}

int cmd_spectrum(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(
      [&]() -> int {
        const Pipeline p = prepare(opt, out);
        fmt::print(out, "kappa0 = {:.17g}\nkappa  = {:.17g}\n", p.dec.kappa0, p.dec.kappa);
        fmt::print(out, "delta  = [{:.17g}]\n", fmt::join(p.dec.delta, ", "));
        fmt::print(out, "follower block of D:\n{}\n", to_string(p.dec.D_follower, 17));
        fmt::print(out, "eigenvalues = [{:.17g}]\nlambda0 = {:.17g}\n", fmt::join(p.spec.lambda, ", "),
                   p.spec.lambda0);
        const std::string y = spectrum_yaml(p.dec, p.spec);
        write_file(opt.out, "spectrum.yaml", y);
        fmt::print(out, "---\n{}", y);
        return kExitOk;
      },
      err);
}

int cmd_synthesize(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(
      [&]() -> int {
        const Pipeline p = prepare(opt, out);
        std::optional<SynthesisCertificate> cert;
        if (opt.bisect_gamma) {
          const GammaSearch gs = minimize_gamma(p.aug, p.spec.lambda0, p.cfg.gamma, 1e-3, p.cfg.solver);
          for (const auto& s : gs.log) fmt::print(out, "  gamma {:.9g}: {}\n", s.gamma, s.feasible ? "feasible" : "not found");
          write_file(opt.out, "gamma_search.yaml", gamma_search_yaml(gs));
          if (!gs.best) {
            fmt::print(err, "no feasible gamma found\n");
            return static_cast<int>(kExitInfeasible);
          }
          fmt::print(out, "smallest feasible gamma: {:.9g} (bracket [{:.9g}, {:.9g}])\n", gs.upper, gs.lower, gs.upper);
          cert = gs.best;
        } else {
          const SynthesisOutcome o = solve_feasibility(p.aug, p.cfg.gamma, p.spec.lambda0, p.cfg.solver);
          fmt::print(out, "solver: {} after {} iterations ({})\n", o.feasible() ? "feasible" : "no certificate",
                     o.iterations, o.message);
          if (!o.feasible()) {
            fmt::print(err, "synthesis failed at gamma = {}: {}\n", p.cfg.gamma, o.message);
            return synthesis_exit(o);
          }
          cert = o.certificate;
        }
        const CertificationReport rep = certify(*cert, p.aug, p.dec, cert->gamma, p.cfg.solver.margin_target * 0.5);
        fmt::print(out, "F = {}\n", to_string(cert->gain.matrix(), 9));
        fmt::print(out, "margins: lmi12 {:.3g}, lmi13 {:.3g}, P {:.3g}, eps {:.3g}\n", rep.margins.lmi12,
                   rep.margins.lmi13, rep.margins.P, rep.margins.eps);
        print_report(out, "decoupled", rep.decoupled);
        print_report(out, "coupled", rep.coupled);
        write_file(opt.out, "certificate.yaml", certificate_yaml(*cert));
        write_file(opt.out, "certification.yaml", verification_yaml(rep.decoupled, rep.coupled, rep.margins));
        return rep.pass ? kExitOk : kExitVerify;
      },
      err);
}

int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(
      [&]() -> int {
        if (opt.gain.empty()) throw ConfigError("--gain", "required");
        const Pipeline p = prepare(opt, out);
        std::optional<GainFile> file;
        const ProtocolGain gain = gain_from(opt, p, &file);
        const VerificationReport dec = verify_theorem1(p.aug, gain, p.spec, p.cfg.gamma);
        const VerificationReport cpl = verify_definition1(p.aug, gain, p.dec, p.cfg.gamma);
        print_report(out, "decoupled", dec);
        print_report(out, "coupled", cpl);
        std::optional<LmiMargins> margins;
        if (file && file->variables) {
          const double lambda0 = file->lambda0.value_or(p.spec.lambda0);
          const double gamma = file->gamma.value_or(p.cfg.gamma);
          margins = lmi_margins(*file->variables, gamma, lambda0, p.aug);
          fmt::print(out, "recomputed margins: lmi12 {:.17g}, lmi13 {:.17g}, P {:.17g}, eps {:.17g}\n",
                     margins->lmi12, margins->lmi13, margins->P, margins->eps);
          if (file->margins) {
            const double diff = std::max({std::abs(margins->lmi12 - file->margins->lmi12),
                                          std::abs(margins->lmi13 - file->margins->lmi13),
                                          std::abs(margins->P - file->margins->P),
                                          std::abs(margins->eps - file->margins->eps)});
            fmt::print(out, "largest difference from stored margins: {:.3g}\n", diff);
          }
        }
        write_file(opt.out, "verification.yaml", verification_yaml(dec, cpl, margins));
        return dec.pass && cpl.pass ? kExitOk : kExitVerify;
      },
      err);
}

int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(
      [&]() -> int {
        const Pipeline p = prepare(opt, out);
        const ProtocolGain gain = gain_from(opt, p);
        const VerificationReport cpl = verify_definition1(p.aug, gain, p.dec, p.cfg.gamma);
        if (!cpl.pass) fmt::print(err, "warning: the gain does not pass verification at gamma = {}\n", p.cfg.gamma);
        SimConfig sc = p.cfg.simulation;
        const bool forced = sc.disturbance.kind != DisturbanceKind::kNone;
        if (forced && !sc.theta0 && !sc.x0 && !sc.z0) {
          // The energy bound is stated for zero initial conditions.
          sc.theta0 = Matrix(p.aug.dim(), 1);
          sc.x0 = std::vector<Matrix>(p.cfg.adjacency.followers(), Matrix(p.aug.m0(), 1));
        }
        const SimSummary s = run_simulation(p, gain, sc, opt.out, "simulation");
        fmt::print(out, "steps: {}\nfinal E: {:.6g}\n", sc.horizon, s.final_E);
        if (s.settling) {
          fmt::print(out, "E(k) < {:g} from step {}\n", kDecayThreshold, *s.settling);
        } else {
          fmt::print(out, "E(k) has not settled below {:g}\n", kDecayThreshold);
        }
        if (forced) {
          fmt::print(out, "energy bound at every prefix: {} (max ratio {:.6g})\n", s.energy_ok ? "holds" : "VIOLATED",
                     s.max_energy_ratio);
        }
        return kExitOk;
      },
      err);
}

int cmd_demo(const Options& opt, std::ostream& out, std::ostream& err) {
  return guarded(
      [&]() -> int {
        const std::string dir = opt.out.empty() ? std::string("demo_output") : opt.out;
        Options o = opt;
        o.out = dir;
        std::vector<std::pair<std::string, bool>> stages;
        auto stage = [&](const std::string& name, bool ok) {
          stages.emplace_back(name, ok);
          fmt::print(out, "[{}] {}\n", ok ? "pass" : "FAIL", name);
        };

        ProjectConfig cfg = load(o);
        const AugmentedSystem aug = augmented(cfg);
        const Validation v = run_validation(cfg, aug);
        write_file(dir, "validation.yaml", validation_yaml(v.topo, v.tree, v.detectable));
        stage("validate", v.pass());
        if (!v.pass()) {
          print_validation(out, v);
          return static_cast<int>(kExitValidation);
        }
        Pipeline p{cfg, aug, build_stochastic(cfg.adjacency, cfg.h), {}};
        p.spec = follower_spectrum(p.dec);
        write_file(dir, "spectrum.yaml", spectrum_yaml(p.dec, p.spec));
        fmt::print(out, "      lambda = [{:.6f}], lambda0 = {:.6f}\n", fmt::join(p.spec.lambda, ", "), p.spec.lambda0);
        stage("spectrum", true);

        const SynthesisOutcome so = solve_feasibility(p.aug, p.cfg.gamma, p.spec.lambda0, p.cfg.solver);
        stage("synthesize", so.feasible());
        if (!so.feasible()) {
          fmt::print(err, "synthesis: {}\n", so.message);
          return synthesis_exit(so);
        }
        const SynthesisCertificate& cert = *so.certificate;
        write_file(dir, "certificate.yaml", certificate_yaml(cert));
        fmt::print(out, "      F = {}\n", to_string(cert.gain.matrix().transpose(), 6));

        std::vector<std::pair<std::string, ProtocolGain>> gains{{"synthesized", cert.gain}};
        if (p.cfg.reference_gain) gains.emplace_back("reference", ProtocolGain(p.aug, *p.cfg.reference_gain));
        bool verified = true;
        for (const auto& [name, gain] : gains) {
          const VerificationReport d = verify_theorem1(p.aug, gain, p.spec, p.cfg.gamma);
          const VerificationReport c = verify_definition1(p.aug, gain, p.dec, p.cfg.gamma);
          write_file(dir, "verify_" + name + ".yaml",
                     verification_yaml(d, c, name == "synthesized" ? std::optional(cert.margins) : std::nullopt));
          fmt::print(out, "      {} gain: max norm {:.6f} (decoupled), {:.6f} (coupled)\n", name, d.max_norm,
                     c.max_norm);
          stage("verify " + name + " gain", d.pass && c.pass);
          verified = verified && d.pass && c.pass;
        }
        if (!verified) return static_cast<int>(kExitVerify);

        bool simulated = true;
        for (const auto& [name, gain] : gains) {
          // Unforced run from seeded initial states, long enough for the
          // rigorous decay bound to drop below the threshold.
          SimConfig zero = p.cfg.simulation;
          zero.disturbance.kind = DisturbanceKind::kNone;
          const Trajectories probe = [&] {
            SimConfig one = zero;
            one.horizon = 1;
            return simulate(p.cfg.adjacency, p.dec, p.aug, gain, one);
          }();
          const double E0 = tracking_error(probe).front();
          const StateSpace closed = coupled_error_system(p.aug, gain, p.dec);
          const DecayPrediction pred = predict_decay(closed.A, E0, kDecayThreshold, 200000);
          zero.horizon = std::max(pred.bound, 1L);
          const SimSummary zs = run_simulation(p, gain, zero, (fs::path(dir) / ("unforced_" + name)).string(),
                                               name + " gain, no disturbance");
          const bool decayed = pred.bound > 0 && zs.settling && *zs.settling <= pred.bound;
          fmt::print(out, "      {} gain: E(0) = {:.4g}, radius {:.6f}, predicted {} (asymptotic {}), settled at {}\n",
                     name, E0, pred.spectral_radius, pred.bound, pred.asymptotic, zs.settling ? *zs.settling : -1L);
          stage("simulate " + name + " gain without disturbance", decayed);

          SimConfig forced = p.cfg.simulation;
          forced.disturbance.kind = DisturbanceKind::kPaperSine;
          forced.theta0 = Matrix(p.aug.dim(), 1);
          forced.x0 = std::vector<Matrix>(p.cfg.adjacency.followers(), Matrix(p.aug.m0(), 1));
          forced.z0.reset();
          const SimSummary fsum = run_simulation(p, gain, forced, (fs::path(dir) / ("forced_" + name)).string(),
                                                 name + " gain, sine disturbance");
          fmt::print(out, "      {} gain: largest energy ratio {:.6f} over {} steps\n", name, fsum.max_energy_ratio,
                     forced.horizon);
          stage("simulate " + name + " gain with disturbance", fsum.energy_ok);
          simulated = simulated && decayed && fsum.energy_ok;
        }

        std::string summary;
        for (const auto& [name, ok] : stages) summary += fmt::format("- stage: {}\n  pass: {}\n", name, ok);
        write_file(dir, "summary.yaml", summary);
        return simulated ? kExitOk : kExitVerify;
      },
      err);
}

}  // namespace hinftrack::cli
