#pragma once

#include <stdexcept>
#include <vector>

#include "degenctrl/adjoint.hpp"
#include "degenctrl/forward.hpp"
#include "degenctrl/weights.hpp"

namespace degenctrl {

struct ControlOptions {
  double eps = 1e-4;  // penalty, relative to the Rayleigh quotient of Lambda at the data
  double cg_tol = 1e-8;
  int cg_max_iter = 500;
  double fp_tol = 1e-6;
  int fp_max_iter = 20;
};

struct ControlProblem {
  const PopulationModel* model = nullptr;
  const WeightSet* weights = nullptr;
  Field y0;
  MemoryKernel kernel = zero_kernel();
  ControlOptions options;
};

// Control weight s^2 gamma^2 e^{2 s sigma} on cells, divided by the scalar
// e^{2 s Phi_hat(0)} and normalised so its maximum over the window is 1:
//   s^2 gamma^2 e^{2 s sigma} = W e^{log_norm + log_hat}.
struct ControlWeights {
  Series W;  // zero outside the window
  double log_norm = 0.0;
  double log_hat = 0.0;  // 2 s Phi_hat(0)
};
ControlWeights control_weights(const PopulationModel& m, const WeightSet& w);

// Lambda z = -y(T) on the target ages, where y solves the forward problem from
// rest with control f = -W chi v and v is the adjoint with terminal data z.
class HumSystem {
 public:
  HumSystem(const PopulationModel& m, const ControlWeights& cw);
  Field apply(const Field& z) const;
  Series control_from(const Field& z) const;
  double inner(const Field& a, const Field& b) const;  // over target ages
  void restrict_to_target(Field& z) const;
  const std::vector<std::size_t>& target_rows() const { return rows_; }

 private:
  const PopulationModel* m_;
  const ControlWeights* cw_;
  std::vector<std::size_t> rows_;
};

class NegativeCurvatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ControlResult {
  Series f;
  Trajectory y;
  Field z_T;
  Series memory_source;  // h evaluated on the frozen trajectory, empty without memory
  double terminal_norm = 0.0;       // ||y(T)|| on ages (a_bar, A)
  double free_terminal_norm = 0.0;  // same without control
  double lambda_ref = 0.0;
  double eps_effective = 0.0;
  int cg_iterations = 0;
  bool converged = false;
  double cg_relative_residual = 0.0;
  std::vector<double> cg_history;     // relative residual per iteration
  std::vector<double> cg_functional;  // 1/2 <(Lambda + eps) z, z> - <rhs, z> per iteration
  double J_scaled = 0.0;  // J e^{2 s Phi_hat(0)}
  double log_J = 0.0;     // log J
};

// Penalised HUM for a fixed memory trajectory (null when the kernel is zero).
ControlResult hum_control(const ControlProblem& problem, const Series* frozen_w);

enum class FixedPointStatus { Converged, MaxIterations, Diverged };
std::string_view to_string(FixedPointStatus s);

struct FixedPointResult {
  ControlResult control;
  FixedPointStatus status = FixedPointStatus::MaxIterations;
  int iterations = 0;
  std::vector<double> residuals;  // ||w_n - w_{n-1}|| / ||w_n||
  std::vector<double> ratios;     // residuals[n] / residuals[n-1]
  std::vector<double> control_norms;   // ||f_n||_Q
  std::vector<double> terminal_norms;  // ||y_n(T)|| on ages (a_bar, A)
  bool converged() const { return status == FixedPointStatus::Converged; }
};

// Picard iteration on the memory term, started from the uncontrolled b = 0 solution.
FixedPointResult memory_fixed_point(const ControlProblem& problem);

double terminal_target_norm(const PopulationModel& m, const Field& yT);

struct EffortAudit {
  double log_lhs = 0.0;  // int_omega s^-2 gamma^-2 f^2 e^{-2 s sigma}
  double log_rhs = 0.0;  // ||h e^{-s Phi}||^2 + ||y0 e^{-s Phi_hat(0)}||^2
  double log_C = 0.0;
  double empirical_C() const { return std::exp(log_C); }
};
EffortAudit control_effort_audit(const ControlProblem& problem, const ControlResult& result);

}  // namespace degenctrl
