#include "degenctrl/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "degenctrl/adjoint.hpp"
#include "degenctrl/carleman_audit.hpp"
#include "degenctrl/control.hpp"
#include "degenctrl/forward.hpp"
#include "degenctrl/io.hpp"
#include "degenctrl/scenario.hpp"

namespace degenctrl {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr double kDualityTol = 1e-10;

json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json nums(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(num(x));
  return a;
}

struct PlotSpec {
  std::string file;
  std::string x;
  std::vector<std::string> y;
  bool log_y = false;
  std::string group;
};

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
  // Registers `name` as an artifact of this run and returns its full path.
  std::string path(const std::string& name) {
    files_.insert(name);
    return (dir_ / name).string();
  }
  void adopt(const std::string& prefix, const std::vector<std::pair<std::string, std::string>>& files) {
    for (const auto& f : files) files_.insert(prefix + "/" + f.first);
    files_.insert(prefix + "/manifest.txt");
  }
  std::string subdir(const std::string& name) const { return (dir_ / name).string(); }
  void plot(PlotSpec p) { plots_.push_back(std::move(p)); }

  // Writes plots.json and manifest.txt. report.json carries timings and is
  // therefore not an artifact.
  std::vector<std::pair<std::string, std::string>> finalize() {
    json pm = json::array();
    for (const auto& p : plots_) {
      json e;
      e["file"] = p.file;
      e["x"] = p.x;
      e["y"] = p.y;
      e["log_y"] = p.log_y;
      if (!p.group.empty()) e["group"] = p.group;
      pm.push_back(e);
    }
    std::ofstream(path("plots.json")) << pm.dump(2) << '\n';
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& f : files_) files.emplace_back(f, file_hash((dir_ / f).string()));
    std::ofstream m((dir_ / "manifest.txt").string());
    for (const auto& [f, h] : files) m << h << "  " << f << '\n';
    return files;
  }

 private:
  fs::path dir_;
  std::set<std::string> files_;
  std::vector<PlotSpec> plots_;
};

class Stopwatch {
 public:
  void mark(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    timings_[stage] = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }
  json to_json() const {
    json j;
    for (const auto& [k, v] : timings_) j[k] = v;
    j["total_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    return j;
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
  std::chrono::steady_clock::time_point last_ = start_;
  std::map<std::string, double> timings_;
};

struct Context {
  const RunConfig& cfg;
  Outputs& out;
  Stopwatch& clock;
  json& body;
  std::vector<std::string>& violations;
  std::vector<std::string>& warnings;
  int jobs = 1;
};

json report_json(const ValidationReport& r, std::size_t max_details = 10) {
  json j;
  j["ok"] = r.ok();
  std::map<std::string, std::size_t> counts;
  for (const auto& v : r.violations) ++counts[v.rule];
  json c = json::object();
  for (const auto& [k, n] : counts) c[k] = n;
  j["violation_counts"] = c;
  json d = json::array();
  for (std::size_t i = 0; i < r.violations.size() && i < max_details; ++i) {
    const auto& v = r.violations[i];
    d.push_back({{"rule", v.rule}, {"t", num(v.t)}, {"a", num(v.a)}, {"x", num(v.x)}, {"residual", num(v.residual)}});
  }
  j["violations"] = d;
  return j;
}

json audit_json(const AuditReport& r) {
  json j;
  j["estimate"] = r.estimate;
  j["s"] = num(r.s);
  json l = json::object(), h = json::object();
  for (const auto& t : r.lhs) l[t.name] = num(t.log_value);
  for (const auto& t : r.rhs) h[t.name] = num(t.log_value);
  j["log_lhs_terms"] = l;
  j["log_rhs_terms"] = h;
  j["log_lhs"] = num(r.log_lhs);
  j["log_rhs"] = num(r.log_rhs);
  j["log_C"] = num(r.log_C);
  j["truncated_weights"] = r.truncated_weights;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

// An audit fails when the left side is positive and the right side vanishes.
bool audit_violated(const AuditReport& r) {
  if (r.lhs.empty() || !std::isfinite(r.log_lhs)) return false;
  return !std::isfinite(r.log_C);
}

json grid_json(const Grid& g) {
  return {{"Nx", g.Nx}, {"Na", g.Na}, {"Nt", g.Nt}, {"T", g.T}, {"A", g.A},
          {"dt", g.dt}, {"da", g.da}, {"nt_adjusted", g.nt_adjusted}};
}

json weights_json(const Scenario& sc) {
  if (!sc.weights) return {{"available", false}, {"reason", sc.weights_error}};
  const WeightSet& w = *sc.weights;
  return {{"available", true},
          {"orientation", std::string(to_string(w.orientation()))},
          {"s", w.s()},
          {"p_norm", num(w.p_norm())},
          {"rho_norm", num(w.rho_norm())},
          {"frak_d", num(w.frak_d())},
          {"kappa", num(w.kappa())},
          {"kappa_max", num(w.kappa_limit())},
          {"truncated", w.truncated()},
          {"frak_d_mesh_sup", w.d_truncated()},
          {"quadrature_converged", w.converged()},
          {"phi_hat_0", num(w.phi_hat(0.0))}};
}

void write_field_csv(const Field& f, const Grid& g, const std::string& path) {
  CsvWriter w(path, {"a", "x", "value"});
  for (std::size_t j = 0; j < g.Na; ++j)
    for (std::size_t i = 0; i < g.Nx; ++i) w.row({g.a_centers[j], g.x_centers[i], f(j, i)});
}

void write_series_block(const Series& s, const Grid& g, const std::string& path) {
  std::vector<double> data;
  data.reserve(s.size() * g.Na * g.Nx);
  for (const auto& f : s) data.insert(data.end(), f.values.begin(), f.values.end());
  write_block(path, {s.size(), g.Na, g.Nx}, data);
}

// ---------------------------------------------------------------- validate

void cmd_validate(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  json checks;
  std::optional<DegeneracyProfile> profile;
  try {
    profile = make_profile(c);
    std::vector<double> mesh;
    const auto nodes = graded_nodes(c.mesh_points, kDefaultValidationRatio,
                                    profile->degenerate_at_0(), profile->degenerate_at_1());
    mesh.assign(nodes.begin() + 1, nodes.end() - 1);
    const auto rep = validate_profile(*profile, mesh);
    json j = report_json(rep);
    j["name"] = profile->name;
    j["class0"] = std::string(to_string(profile->class0));
    j["class1"] = std::string(to_string(profile->class1));
    j["mesh_points"] = mesh.size();
    checks["profile"] = j;
    if (!rep.ok()) ctx.violations.push_back("profile: " + rep.summary());
  } catch (const std::exception& e) {
    checks["profile"] = {{"ok", false}, {"error", e.what()}};
    ctx.violations.push_back(std::string("profile: ") + e.what());
  }

  try {
    const RateSet rates = make_rates(c);
    const auto rep = validate_rates(rates, c.T, c.A);
    json j = report_json(rep);
    j["beta"] = rates.beta_name;
    j["mu"] = rates.mu_name;
    j["a_bar"] = rates.a_bar;
    checks["rates"] = j;
    if (!rep.ok()) ctx.violations.push_back("rates: " + rep.summary());
  } catch (const std::exception& e) {
    checks["rates"] = {{"ok", false}, {"error", e.what()}};
    ctx.violations.push_back(std::string("rates: ") + e.what());
  }

  const bool window_ok = c.alpha > 0.0 && c.alpha < c.rho_w && c.rho_w < 1.0;
  checks["window"] = {{"ok", window_ok}, {"alpha", c.alpha}, {"rho_w", c.rho_w}};
  if (!window_ok) ctx.violations.push_back("window: need 0 < alpha < rho_w < 1");

  try {
    const Grid g = build_grid(c.Nx, c.Na, c.Nt, c.T, c.A, c.grading);
    json j = grid_json(g);
    j["ok"] = true;
    checks["grid"] = j;
    if (g.nt_adjusted) ctx.warnings.push_back("grid: Nt adjusted to " + std::to_string(g.Nt));
  } catch (const std::exception& e) {
    checks["grid"] = {{"ok", false}, {"error", e.what()}};
    ctx.violations.push_back(std::string("grid: ") + e.what());
  }

  if (profile) {
    try {
      WeightOptions wo;
      wo.orientation = resolve_orientation(c, *profile);
      wo.T = c.T;
      wo.A = c.A;
      wo.s = c.s;
      wo.kappa = c.kappa;
      wo.quad_points = c.quad_points;
      const WeightSet w = WeightSet::build(*profile, wo);
      const MemoryKernel k = make_kernel(c, &w);
      const auto adm = check_memory_admissibility(k, c.s, w.p_norm(), c.T, c.A);
      checks["kernel"] = {{"ok", !adm.overflow},
                          {"name", k.name},
                          {"s", c.s},
                          {"weighted_sup", num(adm.sup)},
                          {"overflow", adm.overflow}};
      if (adm.overflow) ctx.violations.push_back("kernel: weighted kernel unbounded at s = " + format_double(c.s));
    } catch (const std::exception& e) {
      // Without weights only a zero kernel can be certified.
      const bool zero = c.kernel == "zero";
      checks["kernel"] = {{"ok", zero}, {"note", e.what()}};
      if (!zero) ctx.violations.push_back(std::string("kernel: ") + e.what());
    }
  }
  ctx.body["checks"] = checks;
  ctx.clock.mark("validate_ms");
}

// ---------------------------------------------------------------- forward

void cmd_forward(Context& ctx, const Scenario& sc) {
  const Grid& g = sc.model.grid;
  ForwardProblem fp;
  fp.model = &sc.model;
  fp.y0 = sc.y0;
  if (!sc.kernel.identically_zero()) {
    fp.source = SelfMemory{sc.kernel};
    if (sc.config.h != "zero") ctx.warnings.push_back("forward: [data] h ignored with a nonzero kernel");
  } else if (sc.config.h != "zero") {
    fp.source = ExplicitSource{sc.h};
  }
  if (sc.config.f != "zero") fp.control = &sc.f;
  const Trajectory y = solve_forward(fp);
  ctx.clock.mark("solve_ms");
  const EnergyAudit e = energy_audit(fp, y);

  export_trajectory_block(y, g, ctx.out.path("forward.blk"));
  export_trajectory_csv(y, g, ctx.out.path("forward.csv"));
  export_diagnostics_csv(y, ctx.out.path("forward_diagnostics.csv"));
  write_field_csv(y.final_state(), g, ctx.out.path("forward_final.csv"));
  ctx.out.plot({"forward_diagnostics.csv", "t", {"L2_norm", "newborn_L2"}, false, "forward"});
  ctx.out.plot({"forward_diagnostics.csv", "t", {"dissipation"}, true, "forward"});

  json j;
  j["source_mode"] = sc.kernel.identically_zero() ? (sc.config.h != "zero" ? "explicit" : "none") : "self_memory";
  j["final_L2"] = num(norm_L2(y.final_state(), g));
  j["terminal_target_norm"] = num(terminal_target_norm(sc.model, y.final_state()));
  j["energy"] = {{"lhs", num(e.lhs)},        {"rhs", num(e.rhs)},
                 {"empirical_C", num(e.empirical_C)}, {"C_beta", num(e.C_beta)},
                 {"C_theory", num(e.C_theory)},       {"within_theory", e.within_theory}};
  ctx.body["forward"] = j;
  if (!std::isfinite(e.empirical_C)) ctx.violations.push_back("energy: positive left side with zero data");
  else if (!e.within_theory) ctx.violations.push_back("energy: empirical constant exceeds the Gronwall bound");
  ctx.clock.mark("audit_ms");
}

// ---------------------------------------------------------------- adjoint

AdjointProblem adjoint_problem(const Scenario& sc) {
  AdjointProblem ap;
  ap.model = &sc.model;
  ap.v_T = sc.v_T;
  ap.g = &sc.g;
  ap.include_beta_term = true;
  return ap;
}

void cmd_adjoint(Context& ctx, const Scenario& sc) {
  const Grid& g = sc.model.grid;
  const AdjointProblem ap = adjoint_problem(sc);
  const Trajectory v = solve_adjoint(ap);
  ctx.clock.mark("solve_ms");

  // Duality against a forward run driven by seeded controls and the scenario data.
  const Series f = make_series("random_smooth", g, 1.0, sc.config.seed, 6);
  ForwardProblem fp;
  fp.model = &sc.model;
  fp.y0 = sc.y0;
  fp.control = &f;
  const Trajectory y = solve_forward(fp);
  const DualityCheck d = duality_check(fp, y, ap, v);

  export_trajectory_block(v, g, ctx.out.path("adjoint.blk"));
  export_diagnostics_csv(v, ctx.out.path("adjoint_diagnostics.csv"));
  {
    CsvWriter w(ctx.out.path("adjoint_trace.csv"), {"t", "x", "value"});
    for (std::size_t n = 0; n <= g.Nt; ++n) {
      const auto tr = adjoint_trace(v, n);
      for (std::size_t i = 0; i < g.Nx; ++i) w.row({g.t_node(n), g.x_centers[i], tr[i]});
    }
  }
  ctx.out.plot({"adjoint_diagnostics.csv", "t", {"L2_norm", "newborn_L2"}, false, "adjoint"});

  json j;
  j["initial_L2"] = num(norm_L2(v.snapshots.front(), g));
  j["duality"] = {{"lhs", num(d.lhs)}, {"rhs", num(d.rhs)}, {"relative_residual", num(d.relative_residual())}};
  if (!(d.relative_residual() <= kDualityTol))
    ctx.violations.push_back("duality residual " + format_double(d.relative_residual()));

  if (sc.weights && sc.model.rates.a_bar > 0.0) {
    const double a_bar = std::min(sc.model.rates.a_bar, g.T);
    const AuditReport tr = trace_estimate_audit(ap, v, *sc.weights, g.T - 0.5 * a_bar, 0.5 * a_bar);
    j["trace_estimate"] = audit_json(tr);
    if (audit_violated(tr)) ctx.violations.push_back("trace estimate: right side vanishes");
  }
  ctx.body["adjoint"] = j;
  ctx.clock.mark("audit_ms");
}

// ---------------------------------------------------------------- carleman

std::vector<EstimateId> selected_estimates(const RunConfig& c) {
  std::vector<EstimateId> out;
  for (const auto& name : c.estimates) {
    if (name == "all") return {std::begin(kAllEstimates), std::end(kAllEstimates)};
    out.push_back(estimate_from_string(name));
  }
  return out;
}

void cmd_carleman(Context& ctx, const Scenario& sc) {
  const WeightSet& w = sc.require_weights();
  const AdjointProblem ap = adjoint_problem(sc);
  const Trajectory v = solve_adjoint(ap);
  ctx.clock.mark("solve_ms");
  const CarlemanInputs in = default_carleman_inputs(sc.model, v, &sc.g, sc.v_T, w);

  CsvWriter terms(ctx.out.path("carleman_terms.csv"), {"estimate", "s", "side", "term", "log_value"});
  CsvWriter consts(ctx.out.path("carleman_C.csv"), {"estimate", "s", "log_lhs", "log_rhs", "log_C"});
  json reports = json::array(), skipped = json::array();
  for (EstimateId id : selected_estimates(sc.config)) {
    const std::string name(to_string(id));
    if (!estimate_applies(id, w, sc.profile)) {
      skipped.push_back(name);
      continue;
    }
    for (double s : sc.config.s_values) {
      const AuditReport r = carleman_audit(id, in, s);
      reports.push_back(audit_json(r));
      for (const auto& t : r.lhs) terms.raw_row({name, format_double(s), "lhs", t.name, format_double(t.log_value)});
      for (const auto& t : r.rhs) terms.raw_row({name, format_double(s), "rhs", t.name, format_double(t.log_value)});
      consts.raw_row({name, format_double(s), format_double(r.log_lhs), format_double(r.log_rhs), format_double(r.log_C)});
      if (audit_violated(r)) ctx.violations.push_back(name + " at s = " + format_double(s) + ": right side vanishes");
    }
  }
  ctx.out.plot({"carleman_C.csv", "s", {"log_C"}, false, "estimate"});
  ctx.body["carleman"] = {{"T0", in.T0}, {"delta", in.delta},
                          {"inner_window", {in.inner_window.alpha, in.inner_window.rho}},
                          {"reports", reports}, {"skipped", skipped}};
  ctx.clock.mark("audit_ms");
}

// ---------------------------------------------------------------- control

json control_json(const ControlResult& r, const EffortAudit& e) {
  const double ratio = r.free_terminal_norm > 0.0 ? r.terminal_norm / r.free_terminal_norm : 0.0;
  return {{"terminal_norm", num(r.terminal_norm)},
          {"free_terminal_norm", num(r.free_terminal_norm)},
          {"terminal_ratio", num(ratio)},
          {"lambda_ref", num(r.lambda_ref)},
          {"eps_effective", num(r.eps_effective)},
          {"cg_iterations", r.cg_iterations},
          {"cg_converged", r.converged},
          {"cg_relative_residual", num(r.cg_relative_residual)},
          {"J_scaled", num(r.J_scaled)},
          {"log_J", num(r.log_J)},
          {"effort", {{"log_lhs", num(e.log_lhs)}, {"log_rhs", num(e.log_rhs)}, {"log_C", num(e.log_C)}}}};
}

void check_support(Context& ctx, const ControlResult& r, const PopulationModel& m) {
  for (std::size_t n = 0; n < r.f.size(); ++n)
    for (std::size_t k = 0; k < r.f[n].values.size(); ++k)
      if (r.f[n].values[k] != 0.0 && m.chi[k % m.grid.Nx] == 0.0) {
        ctx.violations.push_back("control: nonzero outside the window");
        return;
      }
}

void emit_control(Context& ctx, const Scenario& sc, const ControlProblem& p, const ControlResult& r,
                  json& j) {
  const Grid& g = sc.model.grid;
  const EffortAudit e = control_effort_audit(p, r);
  j.update(control_json(r, e));
  write_series_block(r.f, g, ctx.out.path("control_f.blk"));
  export_trajectory_block(r.y, g, ctx.out.path("controlled.blk"));
  write_field_csv(r.y.final_state(), g, ctx.out.path("controlled_final.csv"));
  {
    CsvWriter w(ctx.out.path("cg_history.csv"), {"iteration", "relative_residual"});
    for (std::size_t i = 0; i < r.cg_history.size(); ++i)
      w.row({static_cast<double>(i), r.cg_history[i]});
  }
  ctx.out.plot({"cg_history.csv", "iteration", {"relative_residual"}, true, "control"});
  check_support(ctx, r, sc.model);
  if (!r.converged) ctx.warnings.push_back("control: CG stopped at cg_max_iter");
  if (std::isfinite(e.log_rhs) && !std::isfinite(e.log_C))
    ctx.violations.push_back("control effort: non-finite empirical constant");
}

void cmd_control(Context& ctx, const Scenario& sc) {
  const ControlProblem p = sc.control_problem();
  Series w0;
  if (!p.kernel.identically_zero()) {
    ForwardProblem free_fp;
    free_fp.model = &sc.model;
    free_fp.y0 = sc.y0;
    w0 = solve_forward(free_fp).snapshots;
  }
  const ControlResult r = hum_control(p, w0.empty() ? nullptr : &w0);
  ctx.clock.mark("solve_ms");
  json j;
  j["eps"] = sc.config.eps;
  j["frozen_memory"] = !w0.empty();
  emit_control(ctx, sc, p, r, j);
  ctx.body["control"] = j;
  ctx.clock.mark("audit_ms");
}

void cmd_fixpoint(Context& ctx, const Scenario& sc) {
  const ControlProblem p = sc.control_problem();
  const auto adm = check_memory_admissibility(p.kernel, sc.require_weights().s(),
                                              sc.require_weights().p_norm(), sc.config.T, sc.config.A);
  if (adm.overflow) ctx.warnings.push_back("fixpoint: kernel not certified admissible at this s");
  const FixedPointResult fr = memory_fixed_point(p);
  ctx.clock.mark("solve_ms");
  {
    CsvWriter w(ctx.out.path("fixed_point.csv"), {"iteration", "residual", "control_norm", "terminal_norm"});
    for (std::size_t i = 0; i < fr.residuals.size(); ++i)
      w.row({static_cast<double>(i + 1), fr.residuals[i], fr.control_norms[i], fr.terminal_norms[i]});
  }
  ctx.out.plot({"fixed_point.csv", "iteration", {"residual"}, true, "fixpoint"});
  json j;
  j["eps"] = sc.config.eps;
  j["status"] = std::string(to_string(fr.status));
  j["iterations"] = fr.iterations;
  j["residuals"] = nums(fr.residuals);
  j["ratios"] = nums(fr.ratios);
  j["kernel_weighted_sup"] = num(adm.sup);
  emit_control(ctx, sc, p, fr.control, j);
  ctx.body["fixpoint"] = j;
  if (fr.status == FixedPointStatus::Diverged) ctx.violations.push_back("fixpoint: residual grew three times in a row");
  if (fr.status == FixedPointStatus::MaxIterations) ctx.warnings.push_back("fixpoint: fp_max_iter reached");
  ctx.clock.mark("audit_ms");
}

// ---------------------------------------------------------------- sweep

void cmd_sweep(Context& ctx) {
  std::vector<double> eps = ctx.cfg.eps_list;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<RunResult> results(eps.size());
  std::vector<std::string> errors(eps.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < eps.size(); i = next++) {
      RunConfig c = ctx.cfg;
      c.eps = eps[i];
      c.name = ctx.cfg.name + "/eps_" + std::to_string(i);
      try {
        results[i] = run_command(Command::Fixpoint, c, {ctx.out.subdir("eps_" + std::to_string(i)), 1});
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(ctx.jobs, 1)), 1, eps.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  ctx.clock.mark("runs_ms");

  json runs = json::array();
  CsvWriter w(ctx.out.path("sweep.csv"),
              {"eps", "terminal_norm", "free_terminal_norm", "ratio", "cg_iterations", "fp_iterations", "monotone"});
  bool monotone = true;
  double prev = INFINITY;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!errors[i].empty()) {
      ctx.violations.push_back("sweep eps_" + std::to_string(i) + ": " + errors[i]);
      runs.push_back({{"eps", eps[i]}, {"error", errors[i]}});
      monotone = false;
      continue;
    }
    const json& fp = results[i].report["results"]["fixpoint"];
    const double tn = fp["terminal_norm"].get<double>();
    const bool step_ok = tn <= prev * (1.0 + 1e-9);
    monotone = monotone && step_ok;
    prev = tn;
    w.raw_row({format_double(eps[i]), format_double(tn), format_double(fp["free_terminal_norm"].get<double>()),
               format_double(fp["terminal_ratio"].get<double>()), std::to_string(fp["cg_iterations"].get<int>()),
               std::to_string(fp["iterations"].get<int>()), step_ok ? "1" : "0"});
    ctx.out.adopt("eps_" + std::to_string(i), results[i].artifacts);
    runs.push_back({{"eps", eps[i]},
                    {"dir", "eps_" + std::to_string(i)},
                    {"report_hash", results[i].report_hash},
                    {"terminal_norm", tn},
                    {"terminal_ratio", fp["terminal_ratio"]},
                    {"status", fp["status"]},
                    {"ok", results[i].ok()}});
    for (const auto& v : results[i].violations) ctx.violations.push_back("eps_" + std::to_string(i) + ": " + v);
  }
  w.raw_row({"all", "", "", "", "", "", monotone ? "1" : "0"});
  ctx.out.plot({"sweep.csv", "eps", {"terminal_norm"}, true, "sweep"});
  ctx.body["sweep"] = {{"runs", runs}, {"monotone_nonincreasing", monotone}};
  if (!monotone) ctx.violations.push_back("sweep: terminal norm increased as eps decreased");
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Validate: return "validate";
    case Command::Forward: return "forward";
    case Command::Adjoint: return "adjoint";
    case Command::Carleman: return "carleman";
    case Command::Control: return "control";
    case Command::Fixpoint: return "fixpoint";
    case Command::Sweep: return "sweep";
  }
  return "?";
}

std::optional<Command> command_from_string(std::string_view name) {
  for (Command c : {Command::Validate, Command::Forward, Command::Adjoint, Command::Carleman,
                    Command::Control, Command::Fixpoint, Command::Sweep})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

std::string resolve_out_dir(const std::optional<std::string>& cli_out, const RunConfig& c) {
  if (const char* env = std::getenv("DEGENCTRL_OUT"); env && *env) return env;
  if (cli_out && !cli_out->empty()) return *cli_out;
  return c.out;
}

RunResult run_command(Command cmd, const RunConfig& config, const RunOptions& opt) {
  Outputs out(opt.out_dir);
  Stopwatch clock;
  json body = json::object();
  std::vector<std::string> violations, warnings;
  Context ctx{config, out, clock, body, violations, warnings, opt.jobs};

  const std::string echo = echo_config(config);
  std::ofstream(out.path("config.ini")) << echo;

  json scenario_info;
  if (cmd == Command::Validate) {
    cmd_validate(ctx);
  } else if (cmd == Command::Sweep) {
    cmd_sweep(ctx);
  } else {
    const Scenario sc = build_scenario(config);
    clock.mark("setup_ms");
    scenario_info = {{"grid", grid_json(sc.model.grid)},
                     {"profile", sc.profile.name},
                     {"kernel", sc.kernel.name},
                     {"weights", weights_json(sc)}};
    switch (cmd) {
      case Command::Forward: cmd_forward(ctx, sc); break;
      case Command::Adjoint: cmd_adjoint(ctx, sc); break;
      case Command::Carleman: cmd_carleman(ctx, sc); break;
      case Command::Control: cmd_control(ctx, sc); break;
      case Command::Fixpoint: cmd_fixpoint(ctx, sc); break;
      default: break;
    }
  }

  RunResult res;
  res.artifacts = out.finalize();
  json report;
  report["tool"] = "degenctrl";
  report["version"] = kVersion;
  report["command"] = std::string(to_string(cmd));
  report["scenario"] = config.name;
  report["seed"] = config.seed;
  report["config"] = echo;
  if (!scenario_info.is_null()) report["setup"] = scenario_info;
  report["results"] = body;
  report["violations"] = violations;
  report["warnings"] = warnings;
  report["status"] = violations.empty() ? "pass" : "fail";
  json arts = json::array();
  for (const auto& [f, h] : res.artifacts) arts.push_back({{"file", f}, {"hash", h}});
  report["artifacts"] = arts;
  res.report_hash = hex64(fnv1a64(report.dump()));
  report["report_hash"] = res.report_hash;
  report["timings"] = clock.to_json();
  std::ofstream(out.path("report.json")) << report.dump(2) << '\n';
  res.report = std::move(report);
  res.violations = std::move(violations);
  return res;
}

std::string schema_markdown() {
  std::ostringstream os;
  os << "| section | key | type | default | meaning |\n|---|---|---|---|---|\n";
  for (const auto& k : config_schema())
    os << "| " << k.section << " | " << k.key << " | " << k.type << " | `" << k.default_value << "` | "
       << k.help << " |\n";
  return os.str();
}

}  // namespace degenctrl
