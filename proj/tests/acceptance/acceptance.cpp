// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
//   acceptance [--write-baseline] [--baseline PATH]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "../manufactured.hpp"
#include "degenctrl/carleman_audit.hpp"
#include "degenctrl/coefficients.hpp"
#include "degenctrl/commands.hpp"
#include "degenctrl/config.hpp"
#include "degenctrl/control.hpp"
#include "degenctrl/io.hpp"
#include "degenctrl/scenario.hpp"
#include "degenctrl/weights.hpp"
#include "json.hpp"

using namespace degenctrl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kSource = DEGENCTRL_SOURCE_DIR;
const char* kSuite[] = {"zero.ini", "sd_left.ini", "wd_right.ini", "wd_control.ini", "beta_violation.ini",
                        "bad_exponent.ini"};
const char* kSolvable[] = {"zero.ini", "sd_left.ini", "wd_right.ini", "wd_control.ini"};
const char* kNonzero[] = {"sd_left.ini", "wd_right.ini", "wd_control.ini"};
const char* kControl = "wd_control.ini";

RunConfig config(const std::string& name) { return load_config(kSource + "/configs/" + name); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
    }
    pass = pass && ok;
  }
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- suite runs

struct SuiteRun {
  std::map<std::string, RunResult> results;  // "config/command"
};

SuiteRun run_suite(const fs::path& root) {
  SuiteRun s;
  auto run = [&](const std::string& cfg, Command cmd) {
    const std::string key = cfg + "/" + std::string(to_string(cmd));
    const fs::path dir = root / fs::path(cfg).stem() / std::string(to_string(cmd));
    s.results[key] = run_command(cmd, config(cfg), {dir.string(), 3});
  };
  for (const char* c : kSuite) run(c, Command::Validate);
  for (const char* c : kSolvable)
    for (Command cmd : {Command::Forward, Command::Adjoint, Command::Carleman}) run(c, cmd);
  for (Command cmd : {Command::Control, Command::Fixpoint, Command::Sweep}) run(kControl, cmd);
  return s;
}

// ---------------------------------------------------------------- criteria

Outcome criterion1() {
  Outcome o;
  std::size_t accepted = 0, ratio_checks = 0;
  double worst = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const double M1 = 0.25 * i, M2 = 0.25 * j;
      const auto p = power_law_profile(M1, M2);
      bool ok = true;
      for (std::size_t n : {50u, 200u, 800u})
        ok = ok && validate_profile(p, testing::graded_interior(n, p.degenerate_at_0(), p.degenerate_at_1())).ok();
      accepted += ok;
      // x k'/k = M1 - M2 x / (1 - x)
      for (double x : testing::uniform_mesh(64)) {
        worst = std::max(worst, std::fabs(x * p.k_prime(x) / p.k(x) - (M1 - M2 * x / (1.0 - x))));
        ++ratio_checks;
      }
    }
  std::size_t rejected = 0, tried = 0;
  for (double M : {2.0, 2.5, 3.0})
    for (auto [a, b] : {std::pair{M, 0.0}, std::pair{0.0, M}, std::pair{M, 0.5}}) {
      ++tried;
      try {
        rejected += !validate_profile(power_law_profile(a, b)).ok();
      } catch (const std::exception&) {
        ++rejected;
      }
    }
  o.require(accepted == 64, "lattice accepted " + std::to_string(accepted) + "/64");
  o.require(worst <= 1e-12, "x k'/k off by " + fmt(worst));
  o.require(rejected == tried, "rejected " + std::to_string(rejected) + "/" + std::to_string(tried) + " with M >= 2");
  o.detail << (o.pass ? "" : " | ") << "lattice 64/64 accepted on 3 meshes, max |xk'/k - M1| = " << fmt(worst)
           << " over " << ratio_checks << " points, " << rejected << "/" << tried << " with M >= 2 rejected";
  return o;
}

Outcome criterion2() {
  Outcome o;
  WeightOptions opt;
  const auto wx = WeightSet::build(power_law_profile(1.0, 0.0), opt);
  const double e0 = std::fabs(wx.psi(0.0) + 2.0), e1 = std::fabs(wx.psi(1.0) + 1.0);
  o.require(e0 <= 1e-8 && e1 <= 1e-8, "psi endpoints off by " + fmt(std::max(e0, e1)));

  struct Case {
    double M1, M2;
    Orientation o;
  };
  std::vector<Case> profiles = {{0.25, 0.0, Orientation::Left}, {0.5, 0.0, Orientation::Left},
                                {0.75, 0.0, Orientation::Left}, {0.5, 0.7, Orientation::Left},
                                {0.0, 0.5, Orientation::Right}, {0.0, 0.7, Orientation::Right}};
  for (const char* c : kNonzero) {
    const RunConfig rc = config(c);
    const auto p = make_profile(rc);
    profiles.push_back({rc.M1, rc.M2, resolve_orientation(rc, p)});
  }
  std::size_t checked = 0, nodes = 0, bad = 0;
  for (const auto& c : profiles) {
    WeightOptions wo;
    wo.orientation = c.o;
    const auto w = WeightSet::build(power_law_profile(c.M1, c.M2), wo);
    if (!std::isfinite(w.rho_norm()) || w.truncated()) continue;
    ++checked;
    std::vector<double> xs(128);
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i) / 127.0;
    const auto sp = w.sample(xs);
    for (std::size_t n = 0; n < 64; ++n)
      for (std::size_t j = 0; j < 32; ++j) {
        const double th = w.theta((n + 0.5) / 64.0, (j + 0.5) / 32.0);
        for (std::size_t i = 0; i < xs.size(); ++i, ++nodes) bad += !(th * sp.psi[i] <= th * sp.big_psi[i]);
      }
  }
  o.require(bad == 0, std::to_string(bad) + " nodes with phi > eta");
  o.require(checked >= 6, "only " + std::to_string(checked) + " finite-rho profiles");
  o.detail << (o.pass ? "" : " | ") << "|psi(0)+2| = " << fmt(e0) << ", |psi(1)+1| = " << fmt(e1) << ", phi <= eta on "
           << nodes << " nodes over " << checked << " profiles";
  return o;
}

Outcome criterion3() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double M1 = 1.9 * U(rng), M2 = trial % 3 == 0 ? 1.5 * U(rng) : 0.0;
    const char* beta = trial % 2 ? "ramp" : "zero";
    auto rates = make_rates(beta, 3.0 * U(rng), 0.25 + 0.5 * U(rng), 1.0, "age_linear", U(rng));
    auto m = testing::make_model(M1, M2, 10 + trial % 7, 6 + trial % 5, rates, 1.0, 1.0,
                                 {0.1 + 0.2 * U(rng), 0.6 + 0.3 * U(rng)}, 1.05);
    const Grid& g = m.grid;
    Series f = testing::random_series(rng, g), gs = testing::random_series(rng, g);
    const auto y = solve_forward({&m, Field::zeros(g), {}, &f});
    const auto v = solve_adjoint({&m, Field::zeros(g), &gs, true});
    double fv = 0.0;
    for (std::size_t n = 1; n <= g.Nt; ++n) {
      Field fc = f[n];
      for (std::size_t j = 0; j < g.Na; ++j)
        for (std::size_t i = 0; i < g.Nx; ++i) fc(j, i) *= m.chi[i];
      fv += g.dt * inner(fc, v.cell(n), g);
    }
    const double yg = inner_Q(y.snapshots, gs, g);
    worst = std::max(worst, std::fabs(fv + yg) / std::max(std::fabs(fv), std::fabs(yg)));
  }
  o.require(worst <= 1e-10, "duality residual " + fmt(worst));

  RunConfig rc = config(kControl);
  const Scenario sc = build_scenario(rc);
  const ControlWeights cw = control_weights(sc.model, sc.require_weights());
  const HumSystem hum(sc.model, cw);
  double asym = 0.0, min_q = INFINITY;
  for (int trial = 0; trial < 6; ++trial) {
    Field a = testing::random_field(rng, sc.model.grid), b = testing::random_field(rng, sc.model.grid);
    hum.restrict_to_target(a);
    hum.restrict_to_target(b);
    const Field La = hum.apply(a), Lb = hum.apply(b);
    const double ab = hum.inner(La, b), ba = hum.inner(a, Lb);
    asym = std::max(asym, std::fabs(ab - ba) / std::max(std::fabs(ab), std::fabs(ba)));
    min_q = std::min(min_q, hum.inner(La, a) / hum.inner(a, a));
  }
  o.require(asym <= 1e-10, "Lambda asymmetry " + fmt(asym));
  o.require(min_q >= -1e-10, "negative Rayleigh quotient " + fmt(min_q));
  o.detail << (o.pass ? "" : " | ") << "max duality residual " << fmt(worst) << " on 20 scenarios, Lambda asymmetry "
           << fmt(asym) << ", min Rayleigh quotient " << fmt(min_q);
  return o;
}

EnergyAudit scenario_energy(RunConfig c) {
  const Scenario sc = build_scenario(c);
  ForwardProblem fp{&sc.model, sc.y0, {}, nullptr};
  if (!sc.kernel.identically_zero()) fp.source = SelfMemory{sc.kernel};
  else if (c.h != "zero") fp.source = ExplicitSource{sc.h};
  if (c.f != "zero") fp.control = &sc.f;
  return energy_audit(fp, solve_forward(fp));
}

Outcome criterion4() {
  Outcome o;
  for (const char* name : kNonzero) {
    RunConfig c = config(name);
    const EnergyAudit e1 = scenario_energy(c);
    c.Na *= 2;
    c.Nt *= 2;
    const EnergyAudit e2 = scenario_energy(c);
    const double drift = std::fabs(e2.empirical_C / e1.empirical_C - 1.0);
    o.require(std::isfinite(e1.empirical_C) && std::isfinite(e2.empirical_C), std::string(name) + " C_emp not finite");
    o.require(e1.within_theory && e2.within_theory, std::string(name) + " exceeds the Gronwall bound");
    o.require(drift < 0.2, std::string(name) + " drift " + fmt(drift));
    o.detail << (o.detail.tellp() ? ", " : "") << name << " C_emp " << fmt(e1.empirical_C) << " -> "
             << fmt(e2.empirical_C) << " (drift " << fmt(drift, 2) << ")";
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  double min_order[4] = {INFINITY, INFINITY, INFINITY, INFINITY};
  const char* label[4] = {"forward dt", "forward x", "adjoint dt", "adjoint x"};
  for (double M1 : {0.0, 0.5, 1.5}) {
    double pt[2] = {testing::time_error(16, M1, false), testing::time_error(16, M1, true)};
    double px[2] = {testing::forward_space_error(M1, 16), testing::adjoint_space_error(M1, 16)};
    for (std::size_t n : {32u, 64u, 128u}) {
      const double et[2] = {testing::time_error(n, M1, false), testing::time_error(n, M1, true)};
      const double ex[2] = {testing::forward_space_error(M1, n), testing::adjoint_space_error(M1, n)};
      for (int k = 0; k < 2; ++k) {
        min_order[2 * k] = std::min(min_order[2 * k], testing::order(pt[k], et[k]));
        min_order[2 * k + 1] = std::min(min_order[2 * k + 1], testing::order(px[k], ex[k]));
        pt[k] = et[k];
        px[k] = ex[k];
      }
    }
  }
  for (int k = 0; k < 4; ++k) {
    o.require(min_order[k] >= 0.9, std::string(label[k]) + " order " + fmt(min_order[k]));
    o.detail << (o.detail.tellp() && o.pass ? ", " : (o.pass ? "" : " | ")) << label[k] << " min order "
             << fmt(min_order[k]);
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  double prev = testing::formula_gap(16, "zero", 0.0);
  for (std::size_t Na : {32u, 64u}) {
    const double e = testing::formula_gap(Na, "zero", 0.0);
    const double r = prev / e;
    o.require(r >= 1.7 && r <= 2.3, "ratio " + fmt(r) + " at Na = " + std::to_string(Na));
    o.detail << (o.detail.tellp() && o.pass ? ", " : (o.pass ? "" : " | ")) << "Na " << Na / 2 << "->" << Na
             << " ratio " << fmt(r);
    prev = e;
  }
  return o;
}

Outcome criterion7(const SuiteRun& suite, const fs::path& baseline_path, bool write_baseline) {
  Outcome o;
  json current = json::object();
  std::set<std::string> covered;
  std::size_t audits = 0;
  for (const char* name : kNonzero) {
    const RunResult& r = suite.results.at(std::string(name) + "/carleman");
    o.require(r.ok(), std::string(name) + " carleman reported violations");
    for (const auto& rep : r.report["results"]["carleman"]["reports"]) {
      const std::string est = rep["estimate"].get<std::string>();
      const double logC = rep["log_C"].is_number() ? rep["log_C"].get<double>() : NAN;
      const std::string key = std::string(name) + "/" + est + "/" + format_double(rep["s"].get<double>());
      o.require(std::isfinite(logC), key + " C not finite");
      current[key] = logC;
      covered.insert(est);
      ++audits;
    }
  }
  for (EstimateId id : kAllEstimates)
    o.require(covered.count(std::string(to_string(id))) == 1, std::string(to_string(id)) + " never audited");

  if (write_baseline) {
    fs::create_directories(baseline_path.parent_path());
    std::ofstream(baseline_path) << current.dump(2) << '\n';
    o.detail << (o.pass ? "" : " | ") << audits << " finite audits; baseline written to " << baseline_path.string();
    return o;
  }
  std::ifstream in(baseline_path);
  if (!in) {
    o.require(false, "no baseline at " + baseline_path.string() + " (run with --write-baseline)");
    return o;
  }
  const json base = json::parse(in);
  double worst = 0.0;
  std::size_t compared = 0;
  for (const auto& [key, val] : current.items()) {
    if (!base.contains(key)) {
      o.require(false, key + " missing from baseline");
      continue;
    }
    const double rel = std::fabs(std::exp(val.get<double>() - base[key].get<double>()) - 1.0);
    worst = std::max(worst, rel);
    ++compared;
  }
  o.require(compared == base.size(), "baseline has entries the run did not produce");
  o.require(worst <= 0.25, "baseline drift " + fmt(worst));
  o.detail << (o.pass ? "" : " | ") << audits << " finite audits over " << covered.size()
           << " estimates, max |C/C_baseline - 1| = " << fmt(worst);
  return o;
}

Outcome criterion8(const SuiteRun& suite) {
  Outcome o;
  const json& fp = suite.results.at(std::string(kControl) + "/fixpoint").report["results"]["fixpoint"];
  const double eps = fp["eps"].get<double>();
  const double ratio = fp["terminal_ratio"].get<double>();
  o.require(eps == 1e-6, "demo eps " + fmt(eps));
  o.require(fp["status"] == "converged", "fixed point " + fp["status"].get<std::string>());
  o.require(ratio <= 1e-3, "terminal ratio " + fmt(ratio));
  const json& sw = suite.results.at(std::string(kControl) + "/sweep").report["results"]["sweep"];
  std::vector<double> norms;
  std::ostringstream ratios;
  for (const auto& run : sw["runs"]) {
    norms.push_back(run["terminal_norm"].get<double>());
    ratios << (ratios.tellp() ? "/" : "") << fmt(run["terminal_ratio"].get<double>());
  }
  bool monotone = norms.size() == 3;
  for (std::size_t i = 1; i < norms.size(); ++i) monotone = monotone && norms[i] <= norms[i - 1];
  o.require(monotone && sw["monotone_nonincreasing"].get<bool>(), "sweep not monotone");
  o.detail << (o.pass ? "" : " | ") << "terminal ratio " << fmt(ratio) << " at eps 1e-6 after "
           << fp["iterations"].get<int>() << " iterations; sweep ratios " << ratios.str();
  return o;
}

Outcome criterion9(const SuiteRun& suite) {
  Outcome o;
  const Scenario sc = build_scenario(config(kControl));
  ControlProblem p = sc.control_problem();
  p.kernel = zero_kernel();
  const FixedPointResult trivial = memory_fixed_point(p);
  o.require(trivial.converged() && trivial.iterations == 1,
            "b = 0 took " + std::to_string(trivial.iterations) + " iterations");
  const json& fp = suite.results.at(std::string(kControl) + "/fixpoint").report["results"]["fixpoint"];
  const int it = fp["iterations"].get<int>();
  double max_ratio = 0.0;
  for (const auto& r : fp["ratios"]) max_ratio = std::max(max_ratio, r.get<double>());
  o.require(fp["status"] == "converged" && it <= 20, "admissible kernel: " + fp["status"].get<std::string>());
  o.require(max_ratio < 1.0, "residual ratio " + fmt(max_ratio));
  o.detail << (o.pass ? "" : " | ") << "b = 0: " << trivial.iterations << " iteration; admissible kernel: " << it
           << " iterations, max residual ratio " << fmt(max_ratio);
  return o;
}

Outcome criterion10(const SuiteRun& suite) {
  Outcome o;
  const json& fp = suite.results.at(std::string(kControl) + "/fixpoint").report["results"]["fixpoint"];
  const json& ct = suite.results.at(std::string(kControl) + "/control").report["results"]["control"];
  const double c1 = fp["effort"]["log_C"].get<double>();
  const double cc = ct["effort"]["log_C"].get<double>();
  // Refined run: dt = da halved.
  RunConfig c = config(kControl);
  c.Na *= 2;
  c.Nt *= 2;
  const Scenario sc = build_scenario(c);
  const ControlProblem p = sc.control_problem();
  const FixedPointResult fr = memory_fixed_point(p);
  const double c2 = control_effort_audit(p, fr.control).log_C;
  const double drift = std::fabs(std::exp(c2 - c1) - 1.0);
  o.require(std::isfinite(c1) && std::isfinite(c2) && std::isfinite(cc), "non-finite C_emp");
  o.require(drift < 0.2, "C_emp drift " + fmt(drift) + " under refinement");
  o.detail << (o.pass ? "" : " | ") << "log C_emp fixpoint " << fmt(c1, 4) << " -> " << fmt(c2, 4) << " refined (drift "
           << fmt(drift, 2) << "), control " << fmt(cc, 4);
  return o;
}

Outcome criterion11(const SuiteRun& a, const SuiteRun& b) {
  Outcome o;
  std::size_t same = 0;
  for (const auto& [key, ra] : a.results) {
    const auto it = b.results.find(key);
    const bool eq = it != b.results.end() && it->second.report_hash == ra.report_hash &&
                    it->second.artifacts == ra.artifacts;
    o.require(eq, key + " differs");
    same += eq;
  }
  o.detail << (o.pass ? "" : " | ") << same << "/" << a.results.size() << " report hashes identical across two runs";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  bool write_baseline = false;
  fs::path baseline = kSource + "/tests/baselines/carleman_baseline.json";
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--write-baseline")) write_baseline = true;
    else if (!std::strcmp(argv[i], "--baseline") && i + 1 < argc) baseline = argv[++i];
    else {
      std::cerr << "usage: acceptance [--write-baseline] [--baseline PATH]\n";
      return 2;
    }
  }
  const auto start = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / ("degenctrl_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);

  int failures = 0;
  auto report = [&](int id, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("criterion %2d: %s  %s  [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.str().c_str(), secs);
    std::fflush(stdout);
  };

  report(1, criterion1);
  report(2, criterion2);
  report(3, criterion3);
  report(4, criterion4);
  report(5, criterion5);
  report(6, criterion6);

  SuiteRun first, second;
  std::string suite_error;
  try {
    first = run_suite(root / "run1");
  } catch (const std::exception& e) {
    suite_error = e.what();
  }
  auto with_suite = [&](std::function<Outcome()> f) {
    return [&, f]() -> Outcome {
      if (!suite_error.empty()) throw std::runtime_error("suite run failed: " + suite_error);
      return f();
    };
  };
  report(7, with_suite([&] { return criterion7(first, baseline, write_baseline); }));
  report(8, with_suite([&] { return criterion8(first); }));
  report(9, with_suite([&] { return criterion9(first); }));
  report(10, with_suite([&] { return criterion10(first); }));
  report(11, with_suite([&] {
    second = run_suite(root / "run2");
    return criterion11(first, second);
  }));

  fs::remove_all(root);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d/11 criteria passed in %.1fs\n", 11 - failures, total);
  return failures ? 1 : 0;
}
