#include "degenctrl/discretization.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "degenctrl/kernels.hpp"

namespace degenctrl {

Grid build_grid(std::size_t Nx, std::size_t Na, std::size_t Nt, double T, double A,
                double grading, bool cluster0, bool cluster1) {
  if (Nx < 8 || Na < 1) throw std::invalid_argument("grid needs Nx >= 8 and Na >= 1");
  if (!(T > 0.0) || !(A > 0.0)) throw std::invalid_argument("T and A must be positive");
  const double want = T * static_cast<double>(Na) / A;
  const double rounded = std::round(want);
  if (std::fabs(want - rounded) > 1e-9 * std::max(1.0, want) || rounded < 1.0) {
    std::ostringstream os;
    os << "dt = da needs Nt = T*Na/A = " << want << ", which is not an integer; the smallest Nt"
       << " reaching the requested resolution is " << static_cast<std::size_t>(std::ceil(want))
       << " but no Nt matches Na = " << Na << " (choose Na so that T*Na/A is integral)";
    throw std::invalid_argument(os.str());
  }
  Grid g;
  g.Nx = Nx;
  g.Na = Na;
  g.Nt = static_cast<std::size_t>(rounded);
  g.nt_adjusted = g.Nt != Nt;
  g.T = T;
  g.A = A;
  g.da = A / static_cast<double>(Na);
  g.dt = T / static_cast<double>(g.Nt);
  g.x_faces = graded_nodes(Nx, grading, cluster0, cluster1);
  g.x_centers.resize(Nx);
  g.h.resize(Nx);
  for (std::size_t i = 0; i < Nx; ++i) {
    g.x_centers[i] = 0.5 * (g.x_faces[i] + g.x_faces[i + 1]);
    g.h[i] = g.x_faces[i + 1] - g.x_faces[i];
  }
  g.d.resize(Nx + 1);
  g.d[0] = g.x_centers[0];
  for (std::size_t i = 1; i < Nx; ++i) g.d[i] = g.x_centers[i] - g.x_centers[i - 1];
  g.d[Nx] = 1.0 - g.x_centers[Nx - 1];
  g.a_centers.resize(Na);
  for (std::size_t j = 0; j < Na; ++j) g.a_centers[j] = (static_cast<double>(j) + 0.5) * g.da;
  return g;
}

Series zero_series(const Grid& g) { return Series(g.Nt + 1, Field::zeros(g)); }

DiscreteOperator::DiscreteOperator(const Grid& g, const DegeneracyProfile& profile) {
  const std::size_t n = g.Nx;
  cond_.resize(n + 1);
  for (std::size_t f = 0; f <= n; ++f) {
    const double kf = profile.k(g.x_faces[f]);
    cond_[f] = kf / g.d[f];
  }
  h_ = g.h;
  lower_.resize(n);
  diag_.resize(n);
  upper_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    lower_[i] = i > 0 ? cond_[i] / h_[i] : 0.0;
    upper_[i] = i + 1 < n ? cond_[i + 1] / h_[i] : 0.0;
    diag_[i] = -(cond_[i] + cond_[i + 1]) / h_[i];
  }
}

void DiscreteOperator::apply(std::span<const double> u, std::span<double> out) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag_[i] * u[i];
    if (i > 0) v += lower_[i] * u[i - 1];
    if (i + 1 < n) v += upper_[i] * u[i + 1];
    out[i] = v;
  }
}

void DiscreteOperator::solve_shifted(double tau, std::span<const double> mu,
                                     std::span<const double> rhs, std::span<double> out,
                                     std::span<double> scratch) const {
  const std::size_t n = size();
  double* c = scratch.data();
  double* dd = scratch.data() + n;
  double b0 = 1.0 + tau * mu[0] - tau * diag_[0];
  c[0] = -tau * upper_[0] / b0;
  dd[0] = rhs[0] / b0;
  for (std::size_t i = 1; i < n; ++i) {
    const double ai = -tau * lower_[i];
    const double bi = 1.0 + tau * mu[i] - tau * diag_[i];
    const double m = bi - ai * c[i - 1];
    c[i] = -tau * upper_[i] / m;
    dd[i] = (rhs[i] - ai * dd[i - 1]) / m;
  }
  out[n - 1] = dd[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) out[i] = dd[i] - c[i] * out[i + 1];
}

double DiscreteOperator::dissipation(std::span<const double> u) const {
  const std::size_t n = size();
  double s = 0.0;
  for (std::size_t f = 0; f <= n; ++f) {
    const double left = f > 0 ? u[f - 1] : 0.0;
    const double right = f < n ? u[f] : 0.0;
    const double du = right - left;
    s += cond_[f] * du * du;
  }
  return s;
}

double inner_x(std::span<const double> u, std::span<const double> v, const Grid& g) {
  return kernels::weighted_dot(g.h, u, v);
}

double inner(const Field& u, const Field& v, const Grid& g) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.Na; ++j) s += kernels::weighted_dot(g.h, u.row(j), v.row(j));
  return g.da * s;
}

double norm_L2(const Field& u, const Grid& g) { return std::sqrt(inner(u, u, g)); }

double inner_weighted(const Field& u, const Field& v, const Field& w, const Grid& g) {
  double s = 0.0;
  std::vector<double> hw(g.Nx);
  for (std::size_t j = 0; j < g.Na; ++j) {
    for (std::size_t i = 0; i < g.Nx; ++i) hw[i] = g.h[i] * w(j, i);
    s += kernels::weighted_dot(hw, u.row(j), v.row(j));
  }
  return g.da * s;
}

double inner_Q(const Series& u, const Series& v, const Grid& g) {
  double s = 0.0;
  for (std::size_t n = 1; n <= g.Nt; ++n) s += inner(u[n], v[n], g);
  return g.dt * s;
}

double dissipation(const Field& u, const DiscreteOperator& op, const Grid& g) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.Na; ++j) s += op.dissipation(u.row(j));
  return g.da * s;
}

void semigroup_apply(const DiscreteOperator& op, std::span<const double> mu, std::span<double> u,
                     double total, int substeps) {
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  std::vector<double> scratch(2 * op.size());
  const double tau = total / substeps;
  for (int k = 0; k < substeps; ++k) op.solve_shifted(tau, mu, u, u, scratch);
}

void memory_integral(const MemoryKernel& kernel, const Series& history, std::size_t last,
                     double t_eval, bool extend, const Grid& g, Field& out) {
  out = Field::zeros(g);
  if (kernel.identically_zero()) return;
  std::vector<double> bvals(g.Nx);
  auto accumulate = [&](std::size_t m, double weight) {
    if (weight == 0.0) return;
    const double s = g.t_node(m);
    const Field& y = history[m];
    for (std::size_t j = 0; j < g.Na; ++j) {
      const double a = g.a_centers[j];
      for (std::size_t i = 0; i < g.Nx; ++i) bvals[i] = kernel(t_eval, s, a, g.x_centers[i]);
      kernels::mul_accumulate(weight, bvals, y.row(j), out.row(j));
    }
  };
  for (std::size_t m = 0; m <= last; ++m) {
    double w = g.dt;
    if (m == 0 || m == last) w *= 0.5;
    if (last == 0) w = 0.0;
    if (extend && m == last) w += t_eval - g.t_node(last);
    accumulate(m, w);
  }
}

Field memory_source(const MemoryKernel& kernel, const Series& history, std::size_t t_index,
                    const Grid& g) {
  Field out;
  memory_integral(kernel, history, t_index, g.t_node(t_index), false, g, out);
  return out;
}

std::vector<double> window_mask(const ControlWindow& w, const Grid& g) {
  std::vector<double> m(g.Nx, 0.0);
  for (std::size_t i = 0; i < g.Nx; ++i) m[i] = w.contains(g.x_centers[i]) ? 1.0 : 0.0;
  return m;
}

}  // namespace degenctrl
