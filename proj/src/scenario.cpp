#include "degenctrl/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace degenctrl {

DegeneracyProfile make_profile(const RunConfig& c) {
  if (c.profile == "power_law") return power_law_profile(c.M1, c.M2, c.theta0, c.theta1);
  if (c.profile == "constant") return constant_profile(c.k_value);
  if (c.profile == "csv") {
    if (c.csv_path.empty()) throw std::invalid_argument("[profile] kind = csv needs csv_path");
    return load_profile_csv(c.csv_path, c.M1, c.M2, c.theta0, c.theta1);
  }
  throw std::invalid_argument("unknown profile kind '" + c.profile + "'");
}

RateSet make_rates(const RunConfig& c) {
  return make_rates(c.beta, c.beta_value, c.a_bar, c.A, c.mu, c.mu_value);
}

Orientation resolve_orientation(const RunConfig& c, const DegeneracyProfile& profile) {
  if (c.orientation == "left") return Orientation::Left;
  if (c.orientation == "right") return Orientation::Right;
  return profile.degenerate_at_1() && !profile.degenerate_at_0() ? Orientation::Right
                                                                 : Orientation::Left;
}

MemoryKernel make_kernel(const RunConfig& c, const WeightSet* w) {
  if (c.kernel == "zero") return zero_kernel();
  if (c.kernel == "constant") return constant_kernel(c.kernel_amp);
  if (c.kernel == "gaussian_kernel") return gaussian_kernel(c.kernel_amp, c.kernel_lag, c.kernel_width);
  if (c.kernel == "admissible_decay_kernel") {
    if (!w) throw std::invalid_argument("admissible_decay_kernel needs the Carleman weights");
    return admissible_decay_kernel(c.kernel_amp, w->s(), w->p_norm(), c.T);
  }
  throw std::invalid_argument("unknown kernel kind '" + c.kernel + "'");
}

namespace {

constexpr int kModes = 3;

std::vector<double> mode_coefficients(std::uint64_t seed, std::uint64_t salt, std::size_t n) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + salt);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> c(n);
  for (auto& x : c) x = dist(rng);
  return c;
}

void check_kind(const std::string& kind) {
  if (kind != "zero" && kind != "sin_bump" && kind != "random_smooth")
    throw std::invalid_argument("unknown data kind '" + kind + "'");
}

}  // namespace

Field make_field(const std::string& kind, const Grid& g, double amp, std::uint64_t seed,
                 std::uint64_t salt) {
  check_kind(kind);
  Field f = Field::zeros(g);
  if (kind == "zero") return f;
  const double pi = std::numbers::pi;
  if (kind == "sin_bump") {
    for (std::size_t j = 0; j < g.Na; ++j)
      for (std::size_t i = 0; i < g.Nx; ++i)
        f(j, i) = amp * std::sin(pi * g.x_centers[i]) * std::sin(pi * g.a_centers[j] / g.A);
    return f;
  }
  const auto c = mode_coefficients(seed, salt, kModes * kModes);
  for (std::size_t j = 0; j < g.Na; ++j)
    for (std::size_t i = 0; i < g.Nx; ++i) {
      double v = 0.0;
      for (int m = 1; m <= kModes; ++m)
        for (int l = 0; l < kModes; ++l)
          v += c[(m - 1) * kModes + l] * std::sin(m * pi * g.x_centers[i]) *
               std::cos(l * pi * g.a_centers[j] / g.A) / (m * (l + 1));
      f(j, i) = amp * v;
    }
  return f;
}

Series make_series(const std::string& kind, const Grid& g, double amp, std::uint64_t seed,
                   std::uint64_t salt) {
  check_kind(kind);
  Series s = zero_series(g);
  if (kind == "zero") return s;
  const double pi = std::numbers::pi;
  if (kind == "sin_bump") {
    const Field base = make_field(kind, g, amp, seed, salt);
    for (std::size_t n = 1; n <= g.Nt; ++n) {
      const double tm = std::sin(pi * g.t_cell(n) / g.T);
      for (std::size_t k = 0; k < base.values.size(); ++k) s[n].values[k] = tm * base.values[k];
    }
    return s;
  }
  const Field even = make_field(kind, g, amp, seed, salt);
  const Field odd = make_field(kind, g, amp, seed, salt + 0x5151);
  for (std::size_t n = 1; n <= g.Nt; ++n) {
    const double t = g.t_node(n) / g.T;
    const double c0 = std::cos(pi * t), c1 = std::sin(2.0 * pi * t);
    for (std::size_t k = 0; k < even.values.size(); ++k)
      s[n].values[k] = c0 * even.values[k] + c1 * odd.values[k];
  }
  return s;
}

const WeightSet& Scenario::require_weights() const {
  if (!weights) throw std::runtime_error("Carleman weights unavailable: " + weights_error);
  return *weights;
}

ControlProblem Scenario::control_problem() const {
  ControlProblem p;
  p.model = &model;
  p.weights = &require_weights();
  p.y0 = y0;
  p.kernel = kernel;
  p.options.eps = config.eps;
  p.options.cg_tol = config.cg_tol;
  p.options.cg_max_iter = config.cg_max_iter;
  p.options.fp_tol = config.fp_tol;
  p.options.fp_max_iter = config.fp_max_iter;
  return p;
}

Scenario build_scenario(const RunConfig& c) {
  Scenario sc;
  sc.config = c;
  sc.profile = make_profile(c);
  if (!(c.alpha > 0.0 && c.alpha < c.rho_w && c.rho_w < 1.0))
    throw std::invalid_argument("control window needs 0 < alpha < rho_w < 1");
  Grid grid = build_grid(c.Nx, c.Na, c.Nt, c.T, c.A, c.grading, sc.profile.degenerate_at_0(),
                         sc.profile.degenerate_at_1());
  sc.model = PopulationModel::build(std::move(grid), sc.profile, make_rates(c), {c.alpha, c.rho_w});
  const Grid& g = sc.model.grid;

  WeightOptions wo;
  wo.orientation = resolve_orientation(c, sc.profile);
  wo.T = c.T;
  wo.A = c.A;
  wo.s = c.s;
  wo.kappa = c.kappa;
  wo.quad_points = c.quad_points;
  wo.eps = g.x_centers.front();
  try {
    sc.weights = WeightSet::build(sc.profile, wo);
  } catch (const std::domain_error& e) {
    sc.weights_error = e.what();
  }
  sc.kernel = make_kernel(c, sc.weights ? &*sc.weights : nullptr);

  sc.y0 = make_field(c.y0, g, c.amplitude, c.seed, 1);
  sc.v_T = make_field(c.v_T, g, c.amplitude, c.seed, 2);
  sc.g = make_series(c.g, g, c.amplitude, c.seed, 3);
  sc.f = make_series(c.f, g, c.amplitude, c.seed, 4);
  sc.h = make_series(c.h, g, c.amplitude, c.seed, 5);
  return sc;
}

}  // namespace degenctrl
