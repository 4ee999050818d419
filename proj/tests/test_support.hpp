#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "degenctrl/adjoint.hpp"
#include "degenctrl/forward.hpp"
#include "degenctrl/model.hpp"

namespace testing {

using namespace degenctrl;

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline Field random_field(std::mt19937_64& rng, const Grid& g) {
  Field f = Field::zeros(g);
  f.values = random_vector(rng, g.Na * g.Nx);
  return f;
}

inline Series random_series(std::mt19937_64& rng, const Grid& g) {
  Series s = zero_series(g);
  for (std::size_t n = 1; n <= g.Nt; ++n) s[n] = random_field(rng, g);
  return s;
}

inline PopulationModel make_model(double M1, double M2, std::size_t Nx, std::size_t Na,
                                  const RateSet& rates, double T = 1.0, double A = 1.0,
                                  ControlWindow w = {0.3, 0.8}, double grading = 1.0) {
  auto prof = power_law_profile(M1, M2);
  Grid g = build_grid(Nx, Na, static_cast<std::size_t>(std::llround(T * Na / A)), T, A, grading,
                      prof.degenerate_at_0(), prof.degenerate_at_1());
  return PopulationModel::build(std::move(g), prof, rates, w);
}

inline RateSet no_rates(double a_bar = 0.5, double A = 1.0) {
  return make_rates("zero", 0.0, a_bar, A, "zero", 0.0);
}

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::fabs(v));
  return m;
}

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::fabs(a.values[k] - b.values[k]));
  return m;
}

// n interior points, uniform or graded toward the degenerate ends.
inline std::vector<double> uniform_mesh(std::size_t n) {
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = (static_cast<double>(i) + 1.0) / (static_cast<double>(n) + 1.0);
  return m;
}

inline std::vector<double> graded_interior(std::size_t n, bool c0, bool c1) {
  auto nodes = graded_nodes(n + 1, kDefaultValidationRatio, c0, c1);
  return {nodes.begin() + 1, nodes.end() - 1};
}

// Observed order from errors at successive halvings.
inline double order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

}  // namespace testing
