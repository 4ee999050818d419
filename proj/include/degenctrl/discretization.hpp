#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "degenctrl/coefficients.hpp"

namespace degenctrl {

// Cell-centred tensor grid on (0,T) x (0,A) x (0,1) with dt == da.
struct Grid {
  std::size_t Nx = 0, Na = 0, Nt = 0;
  double T = 1.0, A = 1.0;
  double dt = 0.0, da = 0.0;
  std::vector<double> x_faces;    // Nx + 1
  std::vector<double> x_centers;  // Nx
  std::vector<double> h;          // cell widths, Nx
  std::vector<double> d;          // centre distances incl. the two boundary halves, Nx + 1
  std::vector<double> a_centers;  // Na
  bool nt_adjusted = false;

  double t_node(std::size_t n) const { return static_cast<double>(n) * dt; }
  // Midpoint of (t_{n-1}, t_n); used where weights blow up at t = 0, T.
  double t_cell(std::size_t n) const { return (static_cast<double>(n) - 0.5) * dt; }
};

// Nt is forced to T Na / A. Throws when that is not an integer.
Grid build_grid(std::size_t Nx, std::size_t Na, std::size_t Nt, double T, double A,
                double grading = 1.0, bool cluster0 = false, bool cluster1 = false);

struct Field {
  std::size_t Na = 0, Nx = 0;
  std::vector<double> values;        // row-major, age rows
  std::vector<double> newborn;       // a = 0 trace, Nx
  std::vector<double> terminal_age;  // a = A trace, Nx

  Field() = default;
  Field(std::size_t na, std::size_t nx)
      : Na(na), Nx(nx), values(na * nx, 0.0), newborn(nx, 0.0), terminal_age(nx, 0.0) {}
  static Field zeros(const Grid& g) { return Field(g.Na, g.Nx); }

  double& operator()(std::size_t j, std::size_t i) { return values[j * Nx + i]; }
  double operator()(std::size_t j, std::size_t i) const { return values[j * Nx + i]; }
  std::span<double> row(std::size_t j) { return {values.data() + j * Nx, Nx}; }
  std::span<const double> row(std::size_t j) const { return {values.data() + j * Nx, Nx}; }
  bool empty() const { return values.empty(); }
};

// One Field per time node t_0..t_Nt. Index 0 is ignored by space-time pairings.
using Series = std::vector<Field>;
Series zero_series(const Grid& g);

// Flux-form discretisation of (k u_x)_x with k at faces and homogeneous Dirichlet ends.
class DiscreteOperator {
 public:
  DiscreteOperator() = default;
  DiscreteOperator(const Grid& grid, const DegeneracyProfile& profile);

  std::size_t size() const { return lower_.size(); }
  std::span<const double> conductance() const { return cond_; }  // k_f / d_f, Nx + 1
  std::span<const double> lower() const { return lower_; }
  std::span<const double> diag() const { return diag_; }
  std::span<const double> upper() const { return upper_; }
  std::span<const double> widths() const { return h_; }

  void apply(std::span<const double> u, std::span<double> out) const;
  // (I + tau mu - tau A0) out = rhs. scratch needs 2 Nx entries. rhs and out may alias.
  void solve_shifted(double tau, std::span<const double> mu, std::span<const double> rhs,
                     std::span<double> out, std::span<double> scratch) const;
  // int k u_x^2 over (0,1) for one spatial slice.
  double dissipation(std::span<const double> u) const;

 private:
  std::vector<double> cond_, lower_, diag_, upper_, h_;
};

double inner(const Field& u, const Field& v, const Grid& g);
double norm_L2(const Field& u, const Grid& g);
double inner_weighted(const Field& u, const Field& v, const Field& w, const Grid& g);
// sum_{n=1}^{Nt} dt <u_n, v_n>
double inner_Q(const Series& u, const Series& v, const Grid& g);
double inner_x(std::span<const double> u, std::span<const double> v, const Grid& g);
double dissipation(const Field& u, const DiscreteOperator& op, const Grid& g);

// u <- approximation of S(total) u by `substeps` implicit Euler steps of A0 - mu.
void semigroup_apply(const DiscreteOperator& op, std::span<const double> mu,
                     std::span<double> u, double total, int substeps);

// Trapezoid rule for int_0^{t_last} b(t_eval, s) y(s) ds; with `extend` the
// interval (t_last, t_eval) is added as a left rectangle.
void memory_integral(const MemoryKernel& kernel, const Series& history, std::size_t last,
                     double t_eval, bool extend, const Grid& g, Field& out);
// int_0^{t_index} b(t_index, s) y(s) ds
Field memory_source(const MemoryKernel& kernel, const Series& history, std::size_t t_index,
                    const Grid& g);

struct ControlWindow {
  double alpha = 0.0;
  double rho = 1.0;
  bool contains(double x) const { return x > alpha && x < rho; }
};
std::vector<double> window_mask(const ControlWindow& w, const Grid& g);

}  // namespace degenctrl
