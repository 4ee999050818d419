#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "degenctrl/config.hpp"
#include "degenctrl/control.hpp"
#include "degenctrl/model.hpp"
#include "degenctrl/weights.hpp"

namespace degenctrl {

DegeneracyProfile make_profile(const RunConfig& c);
RateSet make_rates(const RunConfig& c);
Orientation resolve_orientation(const RunConfig& c, const DegeneracyProfile& profile);
// admissible_decay_kernel needs |p|, hence the weights.
MemoryKernel make_kernel(const RunConfig& c, const WeightSet* w);

// zero: 0. sin_bump: amp sin(pi x) sin(pi a / A). random_smooth: a seeded sum of
// low modes sin(m pi x) cos(l pi a / A). `salt` separates independent fields.
Field make_field(const std::string& kind, const Grid& g, double amp, std::uint64_t seed,
                 std::uint64_t salt);
// Same families modulated in time (sin(pi t / T) for sin_bump); index 0 stays zero.
Series make_series(const std::string& kind, const Grid& g, double amp, std::uint64_t seed,
                   std::uint64_t salt);

struct Scenario {
  RunConfig config;
  DegeneracyProfile profile;
  PopulationModel model;
  std::optional<WeightSet> weights;  // absent when kappa_max is undefined (e.g. constant k)
  std::string weights_error;
  MemoryKernel kernel;
  Field y0, v_T;
  Series g, f, h;

  const WeightSet& require_weights() const;
  ControlProblem control_problem() const;
};

Scenario build_scenario(const RunConfig& c);

}  // namespace degenctrl
