#pragma once

// Manufactured solutions shared by the unit tests and the acceptance gate.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include "test_support.hpp"

namespace testing {

using Fn3 = std::function<double(double, double, double)>;

inline Field sample(const Grid& g, double t, const Fn3& f) {
  Field out = Field::zeros(g);
  for (std::size_t j = 0; j < g.Na; ++j)
    for (std::size_t i = 0; i < g.Nx; ++i) out(j, i) = f(t, g.a_centers[j], g.x_centers[i]);
  return out;
}

inline Series sample_series(const Grid& g, const Fn3& f) {
  Series s = zero_series(g);
  for (std::size_t n = 1; n <= g.Nt; ++n) s[n] = sample(g, g.t_node(n), f);
  return s;
}

// max_n ||u^n - exact(t_n)||
inline double max_error(const Trajectory& tr, const Grid& g, const Fn3& exact) {
  double e = 0.0;
  for (std::size_t n = 0; n <= g.Nt; ++n) {
    Field d = tr.snapshots[n];
    const Field ex = sample(g, g.t_node(n), exact);
    for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] -= ex.values[k];
    e = std::max(e, norm_L2(d, g));
  }
  return e;
}

// X(x) and (k X')' for k = x^M1.
struct SpatialMode {
  std::function<double(double)> X;
  std::function<double(double)> AX;
};

inline SpatialMode spatial_mode(double M1) {
  using std::numbers::pi;
  if (M1 == 0.0)
    return {[](double x) { return std::sin(pi * x); }, [](double x) { return -pi * pi * std::sin(pi * x); }};
  // X = x^2 (1 - x): k X' = 2 x^(M1+1) - 3 x^(M1+2).
  return {[](double x) { return x * x * (1.0 - x); },
          [M1](double x) {
            return 2.0 * (M1 + 1.0) * std::pow(x, M1) - 3.0 * (M1 + 2.0) * std::pow(x, M1 + 1.0);
          }};
}

// Zero for c >= 0, so X(x) G(t - a) vanishes at a = 0 for t >= 0.
inline double G_past(double c) {
  return c < 0.0 && c > -1.0 ? std::pow(std::sin(std::numbers::pi * c), 2) : 0.0;
}
// Zero for c <= 0, so X(x) H(t - a) vanishes at a = A = T.
inline double H_future(double c) {
  return c > 0.0 && c < 1.0 ? std::pow(std::sin(std::numbers::pi * c), 2) : 0.0;
}

// Transport is exact along the grid diagonals, so a source built from the
// continuous operator leaves only the spatial error.
inline double forward_space_error(double M1, std::size_t Nx, double mu = 0.2) {
  const SpatialMode c = spatial_mode(M1);
  auto rates = make_rates("zero", 0.0, 0.5, 1.0, "constant", mu);
  auto m = make_model(M1, 0.0, Nx, 8, rates);
  const Grid& g = m.grid;
  Fn3 exact = [&](double t, double a, double x) { return c.X(x) * G_past(t - a); };
  ExplicitSource src{sample_series(g, [&](double t, double a, double x) {
    return (mu * c.X(x) - c.AX(x)) * G_past(t - a);
  })};
  ForwardProblem p{&m, sample(g, 0.0, exact), src, nullptr};
  return max_error(solve_forward(p), g, exact);
}

inline double adjoint_space_error(double M1, std::size_t Nx, double mu = 0.2) {
  const SpatialMode c = spatial_mode(M1);
  auto rates = make_rates("zero", 0.0, 0.5, 1.0, "constant", mu);
  auto m = make_model(M1, 0.0, Nx, 8, rates);
  const Grid& g = m.grid;
  Fn3 exact = [&](double t, double a, double x) { return c.X(x) * H_future(t - a); };
  Series gs = sample_series(g, [&](double t, double a, double x) { return (c.AX(x) - mu * c.X(x)) * H_future(t - a); });
  AdjointProblem p{&m, sample(g, g.T, exact), &gs, true};
  return max_error(solve_adjoint(p), g, exact);
}

// Sources built from the discrete operator, so only the dt = da error remains.
// u = X_h(x) cos(t) sin(pi a), mu = 0.5 (1 + a).
inline double time_error(std::size_t Na, double M1, bool adjoint) {
  using std::numbers::pi;
  auto rates = make_rates("zero", 0.0, 0.5, 1.0, "age_linear", 0.5);
  auto m = make_model(M1, 0.0, 16, Na, rates);
  const Grid& g = m.grid;
  std::vector<double> X(g.Nx), AX(g.Nx);
  for (std::size_t i = 0; i < g.Nx; ++i) X[i] = std::sin(pi * g.x_centers[i]);
  m.op.apply(X, AX);
  auto U = [](double t, double a) { return std::cos(t) * std::sin(pi * a); };
  auto Ut_plus_Ua = [](double t, double a) {
    return -std::sin(t) * std::sin(pi * a) + pi * std::cos(t) * std::cos(pi * a);
  };
  auto exact_at = [&](double t) {
    Field out = Field::zeros(g);
    for (std::size_t j = 0; j < g.Na; ++j)
      for (std::size_t i = 0; i < g.Nx; ++i) out(j, i) = X[i] * U(t, g.a_centers[j]);
    return out;
  };
  Series src = zero_series(g);
  for (std::size_t n = 1; n <= g.Nt; ++n)
    for (std::size_t j = 0; j < g.Na; ++j)
      for (std::size_t i = 0; i < g.Nx; ++i) {
        const double t = g.t_node(n), a = g.a_centers[j], mu = 0.5 * (1.0 + a);
        // forward: u_t + u_a - A u + mu u = h;  adjoint: u_t + u_a + A u - mu u = g.
        src[n](j, i) = adjoint ? X[i] * Ut_plus_Ua(t, a) + AX[i] * U(t, a) - mu * X[i] * U(t, a)
                               : X[i] * Ut_plus_Ua(t, a) - AX[i] * U(t, a) + mu * X[i] * U(t, a);
      }
  Trajectory tr = adjoint ? solve_adjoint({&m, exact_at(g.T), &src, true})
                          : solve_forward({&m, exact_at(0.0), ExplicitSource{src}, nullptr});
  double e = 0.0;
  for (std::size_t n = 0; n <= g.Nt; ++n) {
    Field d = tr.snapshots[n];
    const Field ex = exact_at(g.t_node(n));
    for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] -= ex.values[k];
    e = std::max(e, norm_L2(d, g));
  }
  return e;
}

// max over nodes on four time levels of ||formula - grid solution||_x.
inline double formula_gap(std::size_t Na, const std::string& beta, double beta_value) {
  using std::numbers::pi;
  auto rates = make_rates(beta, beta_value, 0.5, 1.0, "age_linear", 0.2);
  auto m = make_model(0.5, 0.0, 24, Na, rates, 1.0, 1.0, {0.3, 0.8}, 1.05);
  const Grid& g = m.grid;
  Field vT = sample(g, 1.0, [](double, double a, double x) { return std::sin(pi * x) * std::cos(0.5 * pi * a); });
  Series gs = sample_series(g, [](double t, double a, double x) { return x * (1.0 - x) * (1.0 + t * a); });
  AdjointProblem p{&m, vT, &gs, true};
  auto tr = solve_adjoint(p);
  double gap = 0.0;
  for (std::size_t q = 0; q < 4; ++q) {
    const std::size_t n = q * g.Nt / 4;
    for (std::size_t j = 0; j < g.Na; ++j) {
      const auto v = implicit_formula_eval(p, tr, n, j);
      double e = 0.0;
      for (std::size_t i = 0; i < g.Nx; ++i) e += g.h[i] * std::pow(v[i] - tr.snapshots[n](j, i), 2);
      gap = std::max(gap, std::sqrt(e));
    }
  }
  return gap;
}

}  // namespace testing
