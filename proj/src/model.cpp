#include "degenctrl/model.hpp"

#include <algorithm>
#include <cmath>

namespace degenctrl {

PopulationModel PopulationModel::build(Grid grid, DegeneracyProfile profile, RateSet rates,
                                       ControlWindow window) {
  PopulationModel m;
  m.grid = std::move(grid);
  m.profile = std::move(profile);
  m.rates = std::move(rates);
  m.window = window;
  const Grid& g = m.grid;
  m.op = DiscreteOperator(g, m.profile);
  m.beta.resize(g.Na * g.Nx);
  for (std::size_t j = 0; j < g.Na; ++j)
    for (std::size_t i = 0; i < g.Nx; ++i)
      m.beta[j * g.Nx + i] = m.rates.beta(g.a_centers[j], g.x_centers[i]);
  m.mu.resize((g.Nt + 1) * g.Na * g.Nx);
  for (std::size_t n = 0; n <= g.Nt; ++n)
    for (std::size_t j = 0; j < g.Na; ++j)
      for (std::size_t i = 0; i < g.Nx; ++i)
        m.mu[(n * g.Na + j) * g.Nx + i] = m.rates.mu(g.t_node(n), g.a_centers[j], g.x_centers[i]);
  m.chi = window_mask(window, g);
  return m;
}

double PopulationModel::beta_sup() const {
  double s = 0.0;
  for (double b : beta) s = std::max(s, std::fabs(b));
  return s;
}

}  // namespace degenctrl
