#pragma once

#include <vector>

#include "degenctrl/audit.hpp"
#include "degenctrl/forward.hpp"
#include "degenctrl/weights.hpp"

namespace degenctrl {

struct AdjointProblem {
  const PopulationModel* model = nullptr;
  Field v_T;
  const Series* g = nullptr;  // t_0..t_Nt; zero when absent
  bool include_beta_term = true;
};

// Exact transpose of solve_forward under the cell-measure pairing. With u_n the
// values stored in `cells`:
//   <y(T), v_T> - <y0, v(0)> - sum_n dt <q_n, u_n> = sum_n dt <y_n, g_n>,
// so for y0 = 0 and v_T = 0: <f chi, v>_Q = -<y, g>_Q.
// snapshots[n] is v at t_n (snapshots[Nt] == v_T); cells[n] is the post-diffusion
// value on (t_{n-1}, t_n]; newborn_trace[n] is the a = 0 trace.
Trajectory solve_adjoint(const AdjointProblem& problem);

// v(t_n, 0, .): cells[n] youngest row for n >= 1, snapshots[0] youngest row for n = 0.
std::vector<double> adjoint_trace(const Trajectory& v, std::size_t n);

struct DualityCheck {
  double lhs = 0.0;  // <y(T), v_T> - <y0, v(0)> - <q, v>_Q
  double rhs = 0.0;  // <y, g>_Q
  double scale = 0.0;
  double relative_residual() const { return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0; }
};
DualityCheck duality_check(const ForwardProblem& fp, const Trajectory& y, const AdjointProblem& ap,
                           const Trajectory& v);

enum class FormulaBranch { Direct, BetaWindow, AgeCutoff };
std::string_view to_string(FormulaBranch b);
FormulaBranch formula_branch(double t, double a, double T, double A, double a_bar);

// Characteristic representation of v at node (t_n, a_j), built from semigroup
// substeps and trapezoid quadrature; `traj` supplies the a = 0 trace.
std::vector<double> implicit_formula_eval(const AdjointProblem& problem, const Trajectory& traj,
                                          std::size_t n, std::size_t j, int substeps = 4);

// Trace estimate for v(t, 0, x) with window parameters T0 in [T - a_bar, T) and zeta in (0, a_bar].
AuditReport trace_estimate_audit(const AdjointProblem& problem, const Trajectory& v,
                                 const WeightSet& weights, double T0, double zeta);

}  // namespace degenctrl
