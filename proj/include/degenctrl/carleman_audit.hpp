#pragma once

#include <optional>
#include <string>
#include <vector>

#include "degenctrl/adjoint.hpp"
#include "degenctrl/audit.hpp"
#include "degenctrl/weights.hpp"

namespace degenctrl {

enum class EstimateId { Thm31, Cor31, PropModif, PropModifFinal, Caccioppoli, HardyPoincare, RightVariant };
inline constexpr EstimateId kAllEstimates[] = {
    EstimateId::Thm31,        EstimateId::Cor31,         EstimateId::PropModif,
    EstimateId::PropModifFinal, EstimateId::Caccioppoli, EstimateId::HardyPoincare,
    EstimateId::RightVariant};

std::string_view to_string(EstimateId id);
EstimateId estimate_from_string(std::string_view name);
// Thm31, Cor31 and HardyPoincare need Left weights and k(1) > 0; RightVariant needs Right weights.
bool estimate_applies(EstimateId id, const WeightSet& w, const DegeneracyProfile& profile);

struct CarlemanInputs {
  const PopulationModel* model = nullptr;
  const Trajectory* z = nullptr;  // adjoint solution (cells on Q, snapshots at nodes)
  const Series* g = nullptr;      // source, may be null
  const Field* v_T = nullptr;
  const WeightSet* weights = nullptr;
  double T0 = 0.0;     // late window (T0, T)
  double delta = 0.0;  // young ages (0, delta)
  ControlWindow inner_window;  // omega' for the Caccioppoli inequality
};

// Default window parameters: T0 = max(T/2, T - a_bar/2), delta = a_bar/2 (A/4 if a_bar = 0),
// inner window = middle half of omega.
CarlemanInputs default_carleman_inputs(const PopulationModel& m, const Trajectory& z, const Series* g,
                                       const Field& v_T, const WeightSet& w);

// Weighted LHS and RHS integrals of the selected estimate at parameter s. Every
// exponential is accumulated in log space.
AuditReport carleman_audit(EstimateId id, const CarlemanInputs& in, double s);

struct HardyChain {
  double log_q1 = 0.0;  // int v^2 e^{2 s phi}
  double log_q2 = 0.0;  // (1/k(1)) int (k/x^2) (v e^{s phi})^2
  double log_q3 = 0.0;  // int k ((v e^{s phi})_x)^2
  bool first_link_holds() const { return log_q1 <= log_q2 + 1e-12 * std::max(1.0, std::abs(log_q2)); }
};
// v given on Q as cells; throws std::domain_error when k(1) = 0.
HardyChain hardy_poincare_chain(const PopulationModel& m, const Series& v, const WeightSet& w, double s);

}  // namespace degenctrl
