#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "degenctrl/discretization.hpp"
#include "degenctrl/model.hpp"

namespace degenctrl {

struct SelfMemory {
  MemoryKernel kernel;
};
// Memory term evaluated on a given trajectory w instead of the solution itself.
struct FrozenMemory {
  MemoryKernel kernel;
  const Series* w = nullptr;
};
struct ExplicitSource {
  Series h;  // t_0..t_Nt
};
using SourceMode = std::variant<std::monostate, SelfMemory, FrozenMemory, ExplicitSource>;

struct ForwardProblem {
  const PopulationModel* model = nullptr;
  Field y0;
  SourceMode source;
  const Series* control = nullptr;  // f on t_1..t_Nt, restricted to the window by the solver
};

struct StepDiagnostics {
  double t = 0.0;
  double l2 = 0.0;
  double dissipation = 0.0;
  double newborn_l2 = 0.0;
};

struct Trajectory {
  Series snapshots;  // t_0..t_Nt
  // Values paired with sources on Q (index 1..Nt). Empty for forward runs, where
  // they coincide with the snapshots.
  Series cells;
  std::vector<std::vector<double>> newborn_trace;  // (Nt + 1) x Nx
  Series source;  // realised memory or explicit source, empty when absent
  std::vector<StepDiagnostics> diagnostics;

  const Field& cell(std::size_t n) const { return cells.empty() ? snapshots[n] : cells[n]; }
  const Field& final_state() const { return snapshots.back(); }
};

class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// Characteristic shift with renewal into the youngest cell, then one implicit
// diffusion solve per age row.
Trajectory solve_forward(const ForwardProblem& problem);

// sum_j da beta_j y_j
std::vector<double> renewal_trace(const PopulationModel& m, const Field& y);

struct EnergyAudit {
  double lhs = 0.0;  // sup ||y||^2 + int k y_x^2
  double rhs = 0.0;  // ||y0||^2 + ||f chi||^2 + ||h||^2
  double empirical_C = 0.0;
  double C_beta = 0.0;
  double C_theory = 0.0;
  bool within_theory = false;
};
EnergyAudit energy_audit(const ForwardProblem& problem, const Trajectory& traj);

void export_trajectory_block(const Trajectory& traj, const Grid& g, const std::string& path);
void export_trajectory_csv(const Trajectory& traj, const Grid& g, const std::string& path);
void export_diagnostics_csv(const Trajectory& traj, const std::string& path);

}  // namespace degenctrl
