#include "degenctrl/carleman_audit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "degenctrl/logsum.hpp"

namespace degenctrl {

namespace {

constexpr double kNegInf = -INFINITY;

double log_sq(double v) { return v == 0.0 ? kNegInf : 2.0 * std::log(std::fabs(v)); }

// Per-grid spatial data shared by the estimates.
struct Spatial {
  std::vector<double> psi_c, bigpsi_c, psi_f, k_f, k_c, hardy_c;  // hardy: x^2/k or (x-1)^2/k
};

Spatial spatial_data(const PopulationModel& m, const WeightSet& w) {
  const Grid& g = m.grid;
  Spatial s;
  const auto c = w.sample(g.x_centers);
  const auto f = w.sample(g.x_faces);
  s.psi_c = c.psi;
  s.bigpsi_c = c.big_psi;
  s.psi_f = f.psi;
  for (double x : g.x_faces) s.k_f.push_back(m.profile.k(x));
  for (double x : g.x_centers) {
    const double k = m.profile.k(x);
    s.k_c.push_back(k);
    const double dx = w.orientation() == Orientation::Left ? x : x - 1.0;
    s.hardy_c.push_back(dx * dx / k);
  }
  return s;
}

double log_cell_volume(const Grid& g, std::size_t i) { return std::log(g.dt * g.da * g.h[i]); }
double log_face_volume(const Grid& g, std::size_t f) { return std::log(g.dt * g.da * g.d[f]); }

double face_gradient(const Field& z, std::size_t j, std::size_t f, const Grid& g) {
  const double left = f > 0 ? z(j, f - 1) : 0.0;
  const double right = f < g.Nx ? z(j, f) : 0.0;
  return (right - left) / g.d[f];
}

// LHS shared by Thm31, Cor31 and RightVariant.
void carleman_lhs(const CarlemanInputs& in, const Spatial& sp, double s, AuditReport& r) {
  const Grid& g = in.model->grid;
  const WeightSet& w = *in.weights;
  LogSum grad, zero;
  for (std::size_t n = 1; n <= g.Nt; ++n) {
    const Field& z = in.z->cell(n);
    const double t = g.t_cell(n);
    for (std::size_t j = 0; j < g.Na; ++j) {
      const double th = w.theta(t, g.a_centers[j]);
      const double lsth = std::log(s * th);
      for (std::size_t f = 0; f <= g.Nx; ++f) {
        if (sp.k_f[f] == 0.0) continue;
        grad.add_log(log_face_volume(g, f) + lsth + std::log(sp.k_f[f]) +
                     log_sq(face_gradient(z, j, f, g)) + 2.0 * s * th * sp.psi_f[f]);
      }
      for (std::size_t i = 0; i < g.Nx; ++i)
        zero.add_log(log_cell_volume(g, i) + 3.0 * lsth + std::log(sp.hardy_c[i]) + log_sq(z(j, i)) +
                     2.0 * s * th * sp.psi_c[i]);
    }
  }
  r.lhs.push_back({"gradient", grad.log()});
  r.lhs.push_back({"zero_order", zero.log()});
}

void carleman_rhs(const CarlemanInputs& in, const Spatial& sp, double s, bool with_trace,
                  AuditReport& r) {
  const PopulationModel& m = *in.model;
  const Grid& g = m.grid;
  const WeightSet& w = *in.weights;
  LogSum src, obs, trace;
  for (std::size_t n = 1; n <= g.Nt; ++n) {
    const Field& z = in.z->cell(n);
    const auto tr = adjoint_trace(*in.z, n);
    const double t = g.t_cell(n);
    for (std::size_t j = 0; j < g.Na; ++j) {
      const double th = w.theta(t, g.a_centers[j]);
      for (std::size_t i = 0; i < g.Nx; ++i) {
        const double lw = 2.0 * s * th * sp.bigpsi_c[i];
        const double lv = log_cell_volume(g, i);
        if (in.g) src.add_log(lv + log_sq((*in.g)[n](j, i)) + lw);
        if (m.chi[i] != 0.0) obs.add_log(lv + 2.0 * std::log(s * th) + log_sq(z(j, i)) + lw);
        if (with_trace) trace.add_log(lv + log_sq(tr[i]) + lw);
      }
    }
  }
  r.rhs.push_back({"source", src.log()});
  r.rhs.push_back({"observation", obs.log()});
  if (with_trace) r.rhs.push_back({"trace", trace.log()});
}

// Shared LHS of the modified estimates.
void modified_lhs(const CarlemanInputs& in, const Spatial& sp, double s, double log_hat,
                  AuditReport& r) {
  const Grid& g = in.model->grid;
  const WeightSet& w = *in.weights;
  LogSum init, bulk;
  const Field& v0 = in.z->snapshots[0];
  for (std::size_t j = 0; j < g.Na; ++j)
    for (std::size_t i = 0; i < g.Nx; ++i)
      init.add_log(std::log(g.da * g.h[i]) + log_sq(v0(j, i)) + log_hat);
  for (std::size_t n = 1; n <= g.Nt; ++n) {
    const Field& z = in.z->cell(n);
    const double t = g.t_cell(n);
    for (std::size_t j = 0; j < g.Na; ++j) {
      const double ga = w.gamma(t, g.a_centers[j]);
      for (std::size_t i = 0; i < g.Nx; ++i)
        bulk.add_log(log_cell_volume(g, i) + log_sq(z(j, i)) + 2.0 * s * ga * sp.psi_c[i]);
    }
  }
  r.lhs.push_back({"initial", init.log()});
  r.lhs.push_back({"bulk", bulk.log()});
}

NamedTerm modified_observation(const CarlemanInputs& in, const Spatial& sp, double s) {
  const PopulationModel& m = *in.model;
  const Grid& g = m.grid;
  const WeightSet& w = *in.weights;
  LogSum obs;
  for (std::size_t n = 1; n <= g.Nt; ++n) {
    const Field& z = in.z->cell(n);
    const double t = g.t_cell(n);
    for (std::size_t j = 0; j < g.Na; ++j) {
      const double ga = w.gamma(t, g.a_centers[j]);
      for (std::size_t i = 0; i < g.Nx; ++i) {
        if (m.chi[i] == 0.0) continue;
        obs.add_log(log_cell_volume(g, i) + 2.0 * std::log(s * ga) + log_sq(z(j, i)) +
                    2.0 * s * ga * sp.bigpsi_c[i]);
      }
    }
  }
  return {"observation", obs.log()};
}

NamedTerm source_hat(const CarlemanInputs& in, double log_hat) {
  const Grid& g = in.model->grid;
  LogSum src;
  if (in.g)
    for (std::size_t n = 1; n <= g.Nt; ++n) src.add(g.dt * inner((*in.g)[n], (*in.g)[n], g));
  return {"source", src.empty() ? kNegInf : src.log() + log_hat};
}

}  // namespace

std::string_view to_string(EstimateId id) {
  switch (id) {
    case EstimateId::Thm31: return "Thm31";
    case EstimateId::Cor31: return "Cor31";
    case EstimateId::PropModif: return "PropModif";
    case EstimateId::PropModifFinal: return "PropModifFinal";
    case EstimateId::Caccioppoli: return "Caccioppoli";
    case EstimateId::HardyPoincare: return "HardyPoincare";
    case EstimateId::RightVariant: return "RightVariant";
  }
  return "?";
}

EstimateId estimate_from_string(std::string_view name) {
  for (EstimateId id : kAllEstimates)
    if (to_string(id) == name) return id;
  throw std::invalid_argument("unknown estimate '" + std::string(name) + "'");
}

bool estimate_applies(EstimateId id, const WeightSet& w, const DegeneracyProfile& profile) {
  const bool left = w.orientation() == Orientation::Left;
  switch (id) {
    case EstimateId::Thm31:
    case EstimateId::Cor31:
    case EstimateId::HardyPoincare:
      return left && profile.k(1.0) > 0.0;
    case EstimateId::RightVariant:
      return !left && profile.k(0.0) > 0.0;
    default:
      return true;
  }
}

CarlemanInputs default_carleman_inputs(const PopulationModel& m, const Trajectory& z, const Series* g,
                                       const Field& v_T, const WeightSet& w) {
  CarlemanInputs in;
  in.model = &m;
  in.z = &z;
  in.g = g;
  in.v_T = &v_T;
  in.weights = &w;
  const double T = m.grid.T, a_bar = m.rates.a_bar;
  in.T0 = std::max(0.5 * T, T - 0.5 * a_bar);
  in.delta = a_bar > 0.0 ? 0.5 * a_bar : 0.25 * m.grid.A;
  const double len = m.window.rho - m.window.alpha;
  in.inner_window = {m.window.alpha + 0.25 * len, m.window.rho - 0.25 * len};
  return in;
}

AuditReport carleman_audit(EstimateId id, const CarlemanInputs& in, double s) {
  if (!in.model || !in.z || !in.weights || !in.v_T) throw std::invalid_argument("incomplete audit inputs");
  if (!(s > 0.0)) throw std::invalid_argument("s must be positive");
  const PopulationModel& m = *in.model;
  const Grid& g = m.grid;
  const WeightSet& w = *in.weights;
  if (!estimate_applies(id, w, m.profile))
    throw std::invalid_argument(std::string(to_string(id)) + " does not apply to this profile/orientation");
  const Spatial sp = spatial_data(m, w);
  AuditReport r;
  r.estimate = std::string(to_string(id));
  r.s = s;
  r.truncated_weights = w.truncated();
  const double log_hat = 2.0 * s * w.phi_hat(0.0);

  switch (id) {
    case EstimateId::Thm31:
      carleman_lhs(in, sp, s, r);
      carleman_rhs(in, sp, s, false, r);
      break;
    case EstimateId::Cor31:
    case EstimateId::RightVariant:
      carleman_lhs(in, sp, s, r);
      carleman_rhs(in, sp, s, true, r);
      break;
    case EstimateId::PropModif: {
      modified_lhs(in, sp, s, log_hat, r);
      r.rhs.push_back(source_hat(in, log_hat));
      LogSum trace, late;
      for (std::size_t n = 1; n <= g.Nt; ++n) {
        const auto tr = adjoint_trace(*in.z, n);
        trace.add(g.dt * inner_x(tr, tr, g));
        if (g.t_cell(n) >= in.T0)
          for (std::size_t j = 0; j < g.Na && g.a_centers[j] < in.delta; ++j) {
            const auto zr = in.z->cell(n).row(j);
            late.add(g.dt * g.da * inner_x(zr, zr, g));
          }
      }
      r.rhs.push_back({"trace", trace.empty() ? kNegInf : trace.log() + log_hat});
      r.rhs.push_back(modified_observation(in, sp, s));
      r.rhs.push_back({"late_young", late.empty() ? kNegInf : late.log() + log_hat});
      break;
    }
    case EstimateId::PropModifFinal: {
      modified_lhs(in, sp, s, log_hat, r);
      r.rhs.push_back(source_hat(in, log_hat));
      LogSum term;
      for (std::size_t j = 0; j < g.Na && g.a_centers[j] < m.rates.a_bar; ++j) {
        const auto vr = in.v_T->row(j);
        term.add(g.da * inner_x(vr, vr, g));
      }
      r.rhs.push_back({"terminal_young", term.empty() ? kNegInf : term.log() + log_hat});
      r.rhs.push_back(modified_observation(in, sp, s));
      break;
    }
    case EstimateId::Caccioppoli: {
      LogSum lhs, rhs;
      for (std::size_t n = 1; n <= g.Nt; ++n) {
        const Field& z = in.z->cell(n);
        const double t = g.t_cell(n);
        for (std::size_t j = 0; j < g.Na; ++j) {
          const double th = w.theta(t, g.a_centers[j]);
          for (std::size_t f = 1; f < g.Nx; ++f) {
            if (!in.inner_window.contains(g.x_faces[f])) continue;
            lhs.add_log(log_face_volume(g, f) + log_sq(face_gradient(z, j, f, g)) +
                        2.0 * s * th * sp.psi_f[f]);
          }
          for (std::size_t i = 0; i < g.Nx; ++i) {
            if (m.chi[i] == 0.0) continue;
            const double lw = log_cell_volume(g, i) + 2.0 * s * th * sp.psi_c[i];
            rhs.add_log(lw + 2.0 * std::log(s * th) + log_sq(z(j, i)));
            if (in.g) rhs.add_log(lw + log_sq((*in.g)[n](j, i)));
          }
        }
      }
      r.lhs.push_back({"gradient_inner", lhs.log()});
      r.rhs.push_back({"window", rhs.log()});
      break;
    }
    case EstimateId::HardyPoincare: {
      const HardyChain c = hardy_poincare_chain(m, in.z->cells, w, s);
      r.lhs.push_back({"weighted_L2", c.log_q1});
      r.rhs.push_back({"weighted_gradient", c.log_q3});
      r.note = c.first_link_holds() ? "hardy_middle=" + std::to_string(c.log_q2)
                                    : "first link violated: hardy_middle=" + std::to_string(c.log_q2);
      break;
    }
  }
  r.finalize();
  return r;
}

HardyChain hardy_poincare_chain(const PopulationModel& m, const Series& v, const WeightSet& w, double s) {
  const double k1 = m.profile.k(1.0);
  if (!(k1 > 0.0)) throw std::domain_error("Hardy-Poincare chain needs k(1) > 0");
  const Grid& g = m.grid;
  const Spatial sp = spatial_data(m, w);
  LogSum q1, q2, q3;
  std::vector<double> L(g.Nx);
  for (std::size_t n = 1; n <= g.Nt; ++n) {
    const Field& z = v[n];
    const double t = g.t_cell(n);
    for (std::size_t j = 0; j < g.Na; ++j) {
      const double th = w.theta(t, g.a_centers[j]);
      for (std::size_t i = 0; i < g.Nx; ++i) {
        L[i] = s * th * sp.psi_c[i];
        const double base = log_cell_volume(g, i) + log_sq(z(j, i)) + 2.0 * L[i];
        q1.add_log(base);
        q2.add_log(base + std::log(sp.k_c[i] / (g.x_centers[i] * g.x_centers[i])) - std::log(k1));
      }
      for (std::size_t f = 0; f <= g.Nx; ++f) {
        if (sp.k_f[f] == 0.0) continue;
        double lmax = kNegInf;
        if (f > 0) lmax = std::max(lmax, L[f - 1]);
        if (f < g.Nx) lmax = std::max(lmax, L[f]);
        const double right = f < g.Nx ? z(j, f) * std::exp(L[f] - lmax) : 0.0;
        const double left = f > 0 ? z(j, f - 1) * std::exp(L[f - 1] - lmax) : 0.0;
        const double diff = (right - left) / g.d[f];
        q3.add_log(log_face_volume(g, f) + std::log(sp.k_f[f]) + 2.0 * lmax + log_sq(diff));
      }
    }
  }
  return {q1.log(), q2.log(), q3.log()};
}

}  // namespace degenctrl
