#include "degenctrl/adjoint.hpp"

#include <cmath>
#include <stdexcept>

#include "degenctrl/kernels.hpp"
#include "degenctrl/logsum.hpp"

namespace degenctrl {

Trajectory solve_adjoint(const AdjointProblem& p) {
  if (!p.model) throw std::invalid_argument("adjoint problem without a model");
  const PopulationModel& m = *p.model;
  const Grid& g = m.grid;
  if (p.v_T.Na != g.Na || p.v_T.Nx != g.Nx) throw std::invalid_argument("v_T does not match the grid");
  if (p.g && p.g->size() != g.Nt + 1) throw std::invalid_argument("g must have Nt + 1 entries");

  Trajectory tr;
  tr.snapshots.assign(g.Nt + 1, Field());
  tr.cells.assign(g.Nt + 1, Field());
  tr.cells[0] = Field::zeros(g);
  tr.snapshots[g.Nt] = p.v_T;
  std::vector<double> scratch(2 * g.Nx);
  for (std::size_t n = g.Nt; n >= 1; --n) {
    Field u = tr.snapshots[n];
    if (p.g) kernels::axpy(-g.dt, (*p.g)[n].values, u.values);
    for (std::size_t j = 0; j < g.Na; ++j)
      m.op.solve_shifted(g.dt, m.mu_row(n, j), u.row(j), u.row(j), scratch);
    for (double v : u.values)
      if (!std::isfinite(v)) throw NonFiniteError("adjoint solve produced a non-finite value", n);

    Field prev = Field::zeros(g);
    for (std::size_t l = 0; l + 1 < g.Na; ++l) {
      auto src = u.row(l + 1);
      std::copy(src.begin(), src.end(), prev.row(l).begin());
    }
    if (p.include_beta_term)
      for (std::size_t l = 0; l < g.Na; ++l)
        kernels::mul_accumulate(g.da, m.beta_row(l), u.row(0), prev.row(l));
    auto young = u.row(0);
    u.newborn.assign(young.begin(), young.end());
    tr.cells[n] = std::move(u);
    tr.snapshots[n - 1] = std::move(prev);
  }
  tr.newborn_trace.resize(g.Nt + 1);
  for (std::size_t n = 0; n <= g.Nt; ++n) {
    tr.newborn_trace[n] = adjoint_trace(tr, n);
    tr.snapshots[n].newborn = tr.newborn_trace[n];
    StepDiagnostics d;
    d.t = g.t_node(n);
    d.l2 = norm_L2(tr.snapshots[n], g);
    d.dissipation = dissipation(tr.snapshots[n], m.op, g);
    d.newborn_l2 = std::sqrt(inner_x(tr.newborn_trace[n], tr.newborn_trace[n], g));
    tr.diagnostics.push_back(d);
  }
  return tr;
}

std::vector<double> adjoint_trace(const Trajectory& v, std::size_t n) {
  const Field& f = n == 0 ? v.snapshots[0] : v.cells[n];
  auto r = f.row(0);
  return {r.begin(), r.end()};
}

DualityCheck duality_check(const ForwardProblem& fp, const Trajectory& y, const AdjointProblem& ap,
                           const Trajectory& v) {
  const PopulationModel& m = *fp.model;
  const Grid& g = m.grid;
  DualityCheck d;
  const double term_T = inner(y.final_state(), ap.v_T, g);
  const double term_0 = inner(fp.y0, v.snapshots[0], g);
  double term_q = 0.0, term_q_abs = 0.0;
  Field q = Field::zeros(g);
  for (std::size_t n = 1; n <= g.Nt; ++n) {
    std::fill(q.values.begin(), q.values.end(), 0.0);
    if (!y.source.empty()) q.values = y.source[n].values;
    if (fp.control)
      for (std::size_t j = 0; j < g.Na; ++j)
        kernels::mul_accumulate(1.0, m.chi, (*fp.control)[n].row(j), q.row(j));
    const double c = g.dt * inner(q, v.cell(n), g);
    term_q += c;
    term_q_abs += std::fabs(c);
  }
  double term_g = 0.0, term_g_abs = 0.0;
  if (ap.g)
    for (std::size_t n = 1; n <= g.Nt; ++n) {
      const double c = g.dt * inner(y.snapshots[n], (*ap.g)[n], g);
      term_g += c;
      term_g_abs += std::fabs(c);
    }
  d.lhs = term_T - term_0 - term_q;
  d.rhs = term_g;
  d.scale = std::fabs(term_T) + std::fabs(term_0) + term_q_abs + term_g_abs;
  return d;
}

std::string_view to_string(FormulaBranch b) {
  switch (b) {
    case FormulaBranch::Direct: return "direct";
    case FormulaBranch::BetaWindow: return "beta_window";
    case FormulaBranch::AgeCutoff: return "age_cutoff";
  }
  return "?";
}

FormulaBranch formula_branch(double t, double a, double T, double A, double a_bar) {
  const double tol = 1e-12 * std::max(1.0, std::max(T, A));
  const double T_tilde = T - a_bar;
  if (t >= T_tilde + a - tol) return FormulaBranch::Direct;
  const double gamma_AT = A - a + t - T_tilde;
  if (a_bar <= gamma_AT + tol) return FormulaBranch::BetaWindow;
  return FormulaBranch::AgeCutoff;
}

std::vector<double> implicit_formula_eval(const AdjointProblem& p, const Trajectory& traj,
                                          std::size_t n, std::size_t j, int substeps) {
  if (!p.model) throw std::invalid_argument("adjoint problem has no model");
  const PopulationModel& m = *p.model;
  const Grid& g = m.grid;
  if (n > g.Nt || j >= g.Na) throw std::out_of_range("formula node outside the grid");
  const FormulaBranch br =
      formula_branch(g.t_node(n), g.a_centers[j], g.T, g.A, m.rates.a_bar);
  const bool use_beta = p.include_beta_term && br != FormulaBranch::Direct;
  const bool has_terminal = br != FormulaBranch::AgeCutoff;
  const std::size_t M = has_terminal ? g.Nt - n : g.Na - 1 - j;

  // Integrand at node m along the characteristic: beta v(., 0) - g.
  auto integrand = [&](std::size_t k) {
    std::vector<double> F(g.Nx, 0.0);
    const std::size_t nn = n + k, jj = j + k;
    if (p.g) {
      const auto gr = (*p.g)[nn].row(jj);
      for (std::size_t i = 0; i < g.Nx; ++i) F[i] = -gr[i];
    }
    if (use_beta) {
      const auto tr = adjoint_trace(traj, nn);
      kernels::mul_accumulate(1.0, m.beta_row(jj), tr, F);
    }
    return F;
  };
  auto weight = [&](std::size_t k) {
    double w = g.da;
    if (M == 0) return has_terminal ? 0.0 : 0.5 * g.da;
    if (k == 0) w *= 0.5;
    if (k == M) w = has_terminal ? 0.5 * g.da : g.da;  // age cutoff: half cell up to A
    return w;
  };

  std::vector<double> acc(g.Nx, 0.0);
  if (has_terminal) {
    const auto vt = p.v_T.row(j + M);
    acc.assign(vt.begin(), vt.end());
  }
  kernels::axpy(weight(M), integrand(M), acc);
  for (std::size_t k = M; k-- > 0;) {
    semigroup_apply(m.op, m.mu_row(n + k + 1, j + k + 1), acc, g.dt, substeps);
    kernels::axpy(weight(k), integrand(k), acc);
  }
  return acc;
}

AuditReport trace_estimate_audit(const AdjointProblem& p, const Trajectory& v, const WeightSet& w,
                                 double T0, double zeta) {
  const PopulationModel& m = *p.model;
  const Grid& g = m.grid;
  const double a_bar = m.rates.a_bar;
  const double s = w.s();
  AuditReport r;
  r.estimate = "TraceEstimate";
  r.s = s;
  r.truncated_weights = w.truncated();

  LogSum lhs;
  for (std::size_t n = 1; n <= g.Nt; ++n) {
    const auto tr = adjoint_trace(v, n);
    lhs.add(g.dt * inner_x(tr, tr, g));
  }
  r.lhs.push_back({"trace_L2", lhs.log()});

  LogSum window, gq, obs, term, late;
  const auto sp = w.sample(g.x_centers);
  for (std::size_t n = 1; n <= g.Nt; ++n) {
    const double tc = g.t_cell(n);
    const bool in_window = tc >= g.T - a_bar;
    if (p.g) {
      gq.add(g.dt * inner((*p.g)[n], (*p.g)[n], g));
      if (in_window)
        for (std::size_t j = 0; n + j + 1 <= g.Nt && j < g.Na; ++j) {
          const auto gr = (*p.g)[n + j + 1].row(j);
          window.add(g.dt * g.da * inner_x(gr, gr, g));
        }
    }
    const Field& u = v.cell(n);
    if (in_window)
      for (std::size_t j = 0; j < g.Na; ++j) {
        const double ga = w.gamma(tc, g.a_centers[j]);
        for (std::size_t i = 0; i < g.Nx; ++i) {
          if (m.chi[i] == 0.0 || u(j, i) == 0.0) continue;
          obs.add_log(std::log(g.dt * g.da * g.h[i]) + 2.0 * std::log(s * ga * std::fabs(u(j, i))) +
                      2.0 * s * ga * sp.big_psi[i]);
        }
      }
    if (tc >= T0)
      for (std::size_t j = 0; j < g.Na && g.a_centers[j] < zeta; ++j) {
        const auto ur = u.row(j);
        late.add(g.dt * g.da * inner_x(ur, ur, g));
      }
  }
  for (std::size_t j = 0; j < g.Na && g.a_centers[j] < a_bar; ++j) {
    const auto vr = p.v_T.row(j);
    term.add(g.da * inner_x(vr, vr, g));
  }
  r.rhs.push_back({"g_window", window.log()});
  r.rhs.push_back({"g_L2", gq.log()});
  r.rhs.push_back({"observation", obs.log()});
  r.rhs.push_back({"terminal_young", term.log()});
  r.rhs.push_back({"late_young", late.log()});
  r.finalize();
  return r;
}

}  // namespace degenctrl
