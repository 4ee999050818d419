#include "degenctrl/forward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "degenctrl/io.hpp"
#include "degenctrl/kernels.hpp"

namespace degenctrl {

std::vector<double> renewal_trace(const PopulationModel& m, const Field& y) {
  const Grid& g = m.grid;
  std::vector<double> b(g.Nx, 0.0);
  for (std::size_t j = 0; j < g.Na; ++j) kernels::mul_accumulate(g.da, m.beta_row(j), y.row(j), b);
  return b;
}

namespace {

void check_finite(const Field& f, std::size_t step) {
  for (double v : f.values)
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "forward solve produced a non-finite value at step " << step;
      throw NonFiniteError(os.str(), step);
    }
}

StepDiagnostics diagnose(const PopulationModel& m, const Field& y, std::size_t n) {
  const Grid& g = m.grid;
  StepDiagnostics d;
  d.t = g.t_node(n);
  d.l2 = norm_L2(y, g);
  d.dissipation = dissipation(y, m.op, g);
  d.newborn_l2 = std::sqrt(inner_x(y.newborn, y.newborn, g));
  return d;
}

}  // namespace

Trajectory solve_forward(const ForwardProblem& p) {
  if (!p.model) throw std::invalid_argument("forward problem without a model");
  const PopulationModel& m = *p.model;
  const Grid& g = m.grid;
  if (p.y0.Na != g.Na || p.y0.Nx != g.Nx) throw std::invalid_argument("y0 does not match the grid");
  if (p.control && p.control->size() != g.Nt + 1)
    throw std::invalid_argument("control series must have Nt + 1 entries");
  if (const auto* fm = std::get_if<FrozenMemory>(&p.source); fm && (!fm->w || fm->w->size() != g.Nt + 1))
    throw std::invalid_argument("frozen memory needs a trajectory with Nt + 1 entries");
  if (const auto* es = std::get_if<ExplicitSource>(&p.source); es && es->h.size() != g.Nt + 1)
    throw std::invalid_argument("explicit source must have Nt + 1 entries");

  Trajectory tr;
  tr.snapshots.reserve(g.Nt + 1);
  tr.snapshots.push_back(p.y0);
  tr.newborn_trace.reserve(g.Nt + 1);
  const bool has_source = !std::holds_alternative<std::monostate>(p.source);
  if (has_source) tr.source = zero_series(g);

  std::vector<double> scratch(2 * g.Nx);
  Field rhs = Field::zeros(g);
  Field q = Field::zeros(g);
  for (std::size_t n = 0; n < g.Nt; ++n) {
    Field& cur = tr.snapshots[n];
    cur.newborn = renewal_trace(m, cur);
    tr.newborn_trace.push_back(cur.newborn);
    tr.diagnostics.push_back(diagnose(m, cur, n));

    // sources at t_{n+1}
    const double t_next = g.t_node(n + 1);
    bool have_q = false;
    if (const auto* sm = std::get_if<SelfMemory>(&p.source)) {
      memory_integral(sm->kernel, tr.snapshots, n, t_next, true, g, q);
      have_q = true;
    } else if (const auto* fm = std::get_if<FrozenMemory>(&p.source)) {
      memory_integral(fm->kernel, *fm->w, n, t_next, true, g, q);
      have_q = true;
    } else if (const auto* es = std::get_if<ExplicitSource>(&p.source)) {
      q = es->h[n + 1];
      have_q = true;
    }
    if (has_source) tr.source[n + 1] = q;

    std::copy(cur.newborn.begin(), cur.newborn.end(), rhs.row(0).begin());
    for (std::size_t j = 1; j < g.Na; ++j) {
      auto src = cur.row(j - 1);
      std::copy(src.begin(), src.end(), rhs.row(j).begin());
    }
    if (have_q) kernels::axpy(g.dt, q.values, rhs.values);
    if (p.control) {
      const Field& f = (*p.control)[n + 1];
      for (std::size_t j = 0; j < g.Na; ++j) kernels::mul_accumulate(g.dt, m.chi, f.row(j), rhs.row(j));
    }

    Field next = Field::zeros(g);
    for (std::size_t j = 0; j < g.Na; ++j)
      m.op.solve_shifted(g.dt, m.mu_row(n + 1, j), rhs.row(j), next.row(j), scratch);
    auto oldest = cur.row(g.Na - 1);
    std::copy(oldest.begin(), oldest.end(), next.terminal_age.begin());
    check_finite(next, n + 1);
    tr.snapshots.push_back(std::move(next));
  }
  Field& last = tr.snapshots.back();
  last.newborn = renewal_trace(m, last);
  tr.newborn_trace.push_back(last.newborn);
  tr.diagnostics.push_back(diagnose(m, last, g.Nt));
  return tr;
}

EnergyAudit energy_audit(const ForwardProblem& p, const Trajectory& tr) {
  const PopulationModel& m = *p.model;
  const Grid& g = m.grid;
  EnergyAudit e;
  double sup = 0.0, diss = 0.0;
  for (std::size_t n = 0; n <= g.Nt; ++n) {
    sup = std::max(sup, tr.diagnostics[n].l2 * tr.diagnostics[n].l2);
    if (n >= 1) diss += g.dt * tr.diagnostics[n].dissipation;
  }
  e.lhs = sup + diss;
  double rhs = inner(p.y0, p.y0, g);
  double forcing_terms = 0.0;
  if (p.control) {
    double fsum = 0.0;
    Field fc = Field::zeros(g);
    for (std::size_t n = 1; n <= g.Nt; ++n) {
      const Field& f = (*p.control)[n];
      for (std::size_t j = 0; j < g.Na; ++j)
        for (std::size_t i = 0; i < g.Nx; ++i) fc(j, i) = m.chi[i] * f(j, i);
      fsum += g.dt * inner(fc, fc, g);
    }
    rhs += fsum;
    forcing_terms += 1.0;
  }
  if (!tr.source.empty()) {
    rhs += inner_Q(tr.source, tr.source, g);
    forcing_terms += 1.0;
  }
  e.rhs = rhs;
  e.empirical_C = rhs > 0.0 ? e.lhs / rhs : (e.lhs > 0.0 ? INFINITY : 0.0);
  const double b = m.beta_sup();
  e.C_beta = g.A * b * b + forcing_terms;
  const double ct = e.C_beta * g.T;
  e.C_theory = std::exp(ct) * (1.0 + 0.5 * ct) + 0.5;
  e.within_theory = e.empirical_C <= e.C_theory;
  return e;
}

void export_trajectory_block(const Trajectory& tr, const Grid& g, const std::string& path) {
  std::vector<double> data;
  data.reserve((g.Nt + 1) * g.Na * g.Nx);
  for (const auto& f : tr.snapshots) data.insert(data.end(), f.values.begin(), f.values.end());
  write_block(path, {g.Nt + 1, g.Na, g.Nx}, data);
}

void export_trajectory_csv(const Trajectory& tr, const Grid& g, const std::string& path) {
  CsvWriter w(path, {"t", "a", "x", "value"});
  for (std::size_t n = 0; n < tr.snapshots.size(); ++n)
    for (std::size_t j = 0; j < g.Na; ++j)
      for (std::size_t i = 0; i < g.Nx; ++i)
        w.row({g.t_node(n), g.a_centers[j], g.x_centers[i], tr.snapshots[n](j, i)});
}

void export_diagnostics_csv(const Trajectory& tr, const std::string& path) {
  CsvWriter w(path, {"t", "L2_norm", "dissipation", "newborn_L2"});
  for (const auto& d : tr.diagnostics) w.row({d.t, d.l2, d.dissipation, d.newborn_l2});
}

}  // namespace degenctrl
