#include "degenctrl/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "degenctrl/kernels.hpp"
#include "degenctrl/logsum.hpp"

namespace degenctrl {

ControlWeights control_weights(const PopulationModel& m, const WeightSet& w) {
  const Grid& g = m.grid;
  const double s = w.s();
  ControlWeights cw;
  cw.log_hat = 2.0 * s * w.phi_hat(0.0);
  const auto sp = w.sample(g.x_centers);
  Series logW = zero_series(g);
  double lmax = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= g.Nt; ++n)
    for (std::size_t j = 0; j < g.Na; ++j) {
      const double ga = w.gamma(g.t_cell(n), g.a_centers[j]);
      for (std::size_t i = 0; i < g.Nx; ++i) {
        if (m.chi[i] == 0.0) continue;
        const double l = 2.0 * std::log(s * ga) + 2.0 * s * ga * sp.big_psi[i] - cw.log_hat;
        logW[n](j, i) = l;
        lmax = std::max(lmax, l);
      }
    }
  if (!std::isfinite(lmax)) throw std::invalid_argument("control window contains no grid cell");
  cw.log_norm = lmax;
  cw.W = zero_series(g);
  for (std::size_t n = 1; n <= g.Nt; ++n)
    for (std::size_t j = 0; j < g.Na; ++j)
      for (std::size_t i = 0; i < g.Nx; ++i)
        if (m.chi[i] != 0.0) cw.W[n](j, i) = std::exp(logW[n](j, i) - lmax);
  return cw;
}

HumSystem::HumSystem(const PopulationModel& m, const ControlWeights& cw) : m_(&m), cw_(&cw) {
  for (std::size_t j = 0; j < m.grid.Na; ++j)
    if (m.grid.a_centers[j] > m.rates.a_bar) rows_.push_back(j);
}

void HumSystem::restrict_to_target(Field& z) const {
  std::size_t next = 0;
  for (std::size_t j = 0; j < z.Na; ++j) {
    if (next < rows_.size() && rows_[next] == j) {
      ++next;
      continue;
    }
    auto r = z.row(j);
    std::fill(r.begin(), r.end(), 0.0);
  }
}

double HumSystem::inner(const Field& a, const Field& b) const {
  double s = 0.0;
  for (std::size_t j : rows_) s += inner_x(a.row(j), b.row(j), m_->grid);
  return m_->grid.da * s;
}

Series HumSystem::control_from(const Field& z) const {
  AdjointProblem ap;
  ap.model = m_;
  ap.v_T = z;
  restrict_to_target(ap.v_T);
  ap.include_beta_term = true;
  const Trajectory v = solve_adjoint(ap);
  Series f = zero_series(m_->grid);
  for (std::size_t n = 1; n <= m_->grid.Nt; ++n)
    kernels::mul_accumulate(-1.0, cw_->W[n].values, v.cells[n].values, f[n].values);
  return f;
}

Field HumSystem::apply(const Field& z) const {
  const Series f = control_from(z);
  ForwardProblem fp;
  fp.model = m_;
  fp.y0 = Field::zeros(m_->grid);
  fp.control = &f;
  const Trajectory y = solve_forward(fp);
  Field out = y.final_state();
  for (double& v : out.values) v = -v;
  restrict_to_target(out);
  out.newborn.assign(out.Nx, 0.0);
  out.terminal_age.assign(out.Nx, 0.0);
  return out;
}

double terminal_target_norm(const PopulationModel& m, const Field& yT) {
  double s = 0.0;
  for (std::size_t j = 0; j < m.grid.Na; ++j)
    if (m.grid.a_centers[j] > m.rates.a_bar) s += inner_x(yT.row(j), yT.row(j), m.grid);
  return std::sqrt(m.grid.da * s);
}

namespace {

ForwardProblem base_forward(const ControlProblem& p, const Series* frozen_w) {
  ForwardProblem fp;
  fp.model = p.model;
  fp.y0 = p.y0;
  if (!p.kernel.identically_zero()) {
    if (!frozen_w) throw std::invalid_argument("memory kernel present but no frozen trajectory given");
    fp.source = FrozenMemory{p.kernel, frozen_w};
  }
  return fp;
}

void axpy_field(double a, const Field& x, Field& y) { kernels::axpy(a, x.values, y.values); }

}  // namespace

ControlResult hum_control(const ControlProblem& p, const Series* frozen_w) {
  if (!p.model || !p.weights) throw std::invalid_argument("control problem needs a model and weights");
  const PopulationModel& m = *p.model;
  const Grid& g = m.grid;
  const ControlOptions& opt = p.options;
  const ControlWeights cw = control_weights(m, *p.weights);
  const HumSystem hum(m, cw);

  ControlResult res;
  ForwardProblem free_fp = base_forward(p, frozen_w);
  const Trajectory y_free = solve_forward(free_fp);
  res.free_terminal_norm = terminal_target_norm(m, y_free.final_state());

  Field rhs = y_free.final_state();
  hum.restrict_to_target(rhs);
  const double rr = hum.inner(rhs, rhs);
  Field z = Field::zeros(g);
  res.converged = true;
  if (rr > 0.0) {
    const Field Lr = hum.apply(rhs);
    res.lambda_ref = hum.inner(Lr, rhs) / rr;
    res.eps_effective = opt.eps * res.lambda_ref;
    if (!(res.eps_effective > 0.0)) res.eps_effective = opt.eps;
    const double eps = res.eps_effective;
    // CG on (Lambda + eps) z = rhs, started from z = 0.
    Field r = rhs, pdir = rhs;
    double rs = rr;
    const double stop = opt.cg_tol * opt.cg_tol * rr;
    res.converged = false;
    res.cg_history.push_back(1.0);
    res.cg_functional.push_back(0.0);
    for (int it = 0; it < opt.cg_max_iter; ++it) {
      Field Ap = hum.apply(pdir);
      axpy_field(eps, pdir, Ap);
      const double curv = hum.inner(pdir, Ap);
      if (!(curv > 0.0)) throw NegativeCurvatureError("CG met nonpositive curvature in the HUM system");
      const double alpha = rs / curv;
      axpy_field(alpha, pdir, z);
      axpy_field(-alpha, Ap, r);
      const double rs_new = hum.inner(r, r);
      res.cg_iterations = it + 1;
      res.cg_history.push_back(std::sqrt(rs_new / rr));
      // With r = rhs - (Lambda + eps) z the functional is -<rhs + r, z> / 2.
      res.cg_functional.push_back(-0.5 * (hum.inner(rhs, z) + hum.inner(r, z)));
      if (rs_new <= stop) {
        res.converged = true;
        rs = rs_new;
        break;
      }
      const double beta = rs_new / rs;
      rs = rs_new;
      for (std::size_t k = 0; k < pdir.values.size(); ++k) pdir.values[k] = r.values[k] + beta * pdir.values[k];
    }
    res.cg_relative_residual = std::sqrt(rs / rr);
  }
  res.z_T = z;
  res.f = hum.control_from(z);

  ForwardProblem fp = base_forward(p, frozen_w);
  fp.control = &res.f;
  res.y = solve_forward(fp);
  res.memory_source = res.y.source;
  res.terminal_norm = terminal_target_norm(m, res.y.final_state());

  // J e^{2 s Phi_hat(0)} = ||y||_Q^2 + ||y(T)||^2 on (0, a_bar) + sum f^2 / (W e^{log_norm})
  double young = 0.0;
  for (std::size_t j = 0; j < g.Na; ++j)
    if (g.a_centers[j] < m.rates.a_bar)
      young += g.da * inner_x(res.y.final_state().row(j), res.y.final_state().row(j), g);
  LogSum ctrl;
  for (std::size_t n = 1; n <= g.Nt; ++n)
    for (std::size_t k = 0; k < res.f[n].values.size(); ++k) {
      const double fv = res.f[n].values[k], wv = cw.W[n].values[k];
      if (fv == 0.0 || wv == 0.0) continue;
      const std::size_t i = k % g.Nx;
      ctrl.add_log(std::log(g.dt * g.da * g.h[i]) + 2.0 * std::log(std::fabs(fv)) - std::log(wv));
    }
  LogSum J;
  J.add(inner_Q(res.y.snapshots, res.y.snapshots, g));
  J.add(young);
  if (!ctrl.empty()) J.add_log(ctrl.log() - cw.log_norm);
  res.J_scaled = J.value();
  res.log_J = J.log() - cw.log_hat;
  return res;
}

std::string_view to_string(FixedPointStatus s) {
  switch (s) {
    case FixedPointStatus::Converged: return "converged";
    case FixedPointStatus::MaxIterations: return "max_iterations";
    case FixedPointStatus::Diverged: return "diverged";
  }
  return "?";
}

FixedPointResult memory_fixed_point(const ControlProblem& p) {
  FixedPointResult out;
  const Grid& g = p.model->grid;
  if (p.kernel.identically_zero()) {
    // Constant map: its first image is the fixed point.
    out.control = hum_control(p, nullptr);
    out.iterations = 1;
    out.residuals.push_back(0.0);
    out.control_norms.push_back(std::sqrt(inner_Q(out.control.f, out.control.f, g)));
    out.terminal_norms.push_back(out.control.terminal_norm);
    out.status = FixedPointStatus::Converged;
    return out;
  }
  ForwardProblem free_fp;
  free_fp.model = p.model;
  free_fp.y0 = p.y0;
  Series w = solve_forward(free_fp).snapshots;
  int growth = 0;
  for (int it = 1; it <= p.options.fp_max_iter; ++it) {
    ControlResult res = hum_control(p, &w);
    Series& wn = res.y.snapshots;
    double diff = 0.0, nrm = 0.0;
    for (std::size_t n = 0; n <= g.Nt; ++n) {
      Field d = wn[n];
      axpy_field(-1.0, w[n], d);
      diff += inner(d, d, g);
      nrm += inner(wn[n], wn[n], g);
    }
    const double rel = nrm > 0.0 ? std::sqrt(diff / nrm) : std::sqrt(diff);
    if (!out.residuals.empty()) {
      const double prev = out.residuals.back();
      out.ratios.push_back(prev > 0.0 ? rel / prev : 0.0);
      growth = rel > prev ? growth + 1 : 0;
    }
    out.residuals.push_back(rel);
    out.control_norms.push_back(std::sqrt(inner_Q(res.f, res.f, g)));
    out.terminal_norms.push_back(res.terminal_norm);
    out.iterations = it;
    w = wn;
    out.control = std::move(res);
    if (rel <= p.options.fp_tol) {
      out.status = FixedPointStatus::Converged;
      return out;
    }
    if (growth >= 3) {
      out.status = FixedPointStatus::Diverged;
      return out;
    }
  }
  out.status = FixedPointStatus::MaxIterations;
  return out;
}

EffortAudit control_effort_audit(const ControlProblem& p, const ControlResult& res) {
  const PopulationModel& m = *p.model;
  const Grid& g = m.grid;
  const WeightSet& w = *p.weights;
  const double s = w.s();
  const ControlWeights cw = control_weights(m, w);
  LogSum lhs, rhs;
  for (std::size_t n = 1; n <= g.Nt; ++n)
    for (std::size_t k = 0; k < res.f[n].values.size(); ++k) {
      const double fv = res.f[n].values[k], wv = cw.W[n].values[k];
      if (fv == 0.0 || wv == 0.0) continue;
      const std::size_t i = k % g.Nx;
      lhs.add_log(std::log(g.dt * g.da * g.h[i]) + 2.0 * std::log(std::fabs(fv)) - std::log(wv));
    }
  EffortAudit e;
  e.log_lhs = lhs.log() - cw.log_norm - cw.log_hat;
  if (!res.memory_source.empty()) {
    const auto sp = w.sample(g.x_centers);
    for (std::size_t n = 1; n <= g.Nt; ++n)
      for (std::size_t j = 0; j < g.Na; ++j) {
        const double ga = w.gamma(g.t_cell(n), g.a_centers[j]);
        for (std::size_t i = 0; i < g.Nx; ++i) {
          const double hv = res.memory_source[n](j, i);
          if (hv == 0.0) continue;
          rhs.add_log(std::log(g.dt * g.da * g.h[i]) + 2.0 * std::log(std::fabs(hv)) -
                      2.0 * s * ga * sp.psi[i]);
        }
      }
  }
  const double y0n = inner(p.y0, p.y0, g);
  if (y0n > 0.0) rhs.add_log(std::log(y0n) - cw.log_hat);
  e.log_rhs = rhs.log();
  e.log_C = e.log_lhs - e.log_rhs;
  return e;
}

}  // namespace degenctrl
