#pragma once

#include <span>
#include <vector>

#include "degenctrl/coefficients.hpp"
#include "degenctrl/discretization.hpp"

namespace degenctrl {

// Coefficients sampled on a grid together with the assembled spatial operator.
// Shared by the forward and adjoint solvers so that both use identical matrices.
struct PopulationModel {
  Grid grid;
  DegeneracyProfile profile;
  RateSet rates;
  ControlWindow window;
  DiscreteOperator op;
  std::vector<double> beta;  // Na x Nx
  std::vector<double> mu;    // (Nt + 1) x Na x Nx at t_node(n)
  std::vector<double> chi;   // Nx

  static PopulationModel build(Grid grid, DegeneracyProfile profile, RateSet rates,
                               ControlWindow window);

  std::span<const double> beta_row(std::size_t j) const {
    return {beta.data() + j * grid.Nx, grid.Nx};
  }
  std::span<const double> mu_row(std::size_t n, std::size_t j) const {
    return {mu.data() + (n * grid.Na + j) * grid.Nx, grid.Nx};
  }
  double beta_sup() const;
};

}  // namespace degenctrl
