#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace degenctrl {

// Endpoint behaviour of the diffusion coefficient k.
enum class EndpointClass { None, Weak, Strong };

std::string_view to_string(EndpointClass c);
// 0 -> None, (0,1) -> Weak, [1,2) -> Strong; anything else throws.
EndpointClass classify_exponent(double M);

struct DegeneracyProfile {
  std::string name;
  std::function<double(double)> k;
  std::function<double(double)> k_prime;  // optional; central differences otherwise
  // k(1 - d) for small d without cancellation; optional.
  std::function<double(double)> k_from_1;
  double M1 = 0.0;
  double M2 = 0.0;
  std::optional<double> theta0;
  std::optional<double> theta1;
  EndpointClass class0 = EndpointClass::None;
  EndpointClass class1 = EndpointClass::None;

  bool degenerate_at_0() const { return class0 != EndpointClass::None; }
  bool degenerate_at_1() const { return class1 != EndpointClass::None; }
  // k'(x); spacing is the local mesh spacing used to size the difference step.
  double derivative(double x, double spacing = 1e-3) const;
  double k_at_distance_from_1(double d) const { return k_from_1 ? k_from_1(d) : k(1.0 - d); }
};

// k(x) = x^M1 (1-x)^M2, M1, M2 in [0, 2).
DegeneracyProfile power_law_profile(double M1, double M2, std::optional<double> theta0 = {},
                                    std::optional<double> theta1 = {});
DegeneracyProfile constant_profile(double c);
// Monotone cubic (PCHIP) through (x, k); declared exponents are taken as given.
DegeneracyProfile tabulated_profile(std::vector<double> x, std::vector<double> k, double M1,
                                    double M2, std::optional<double> theta0 = {},
                                    std::optional<double> theta1 = {});
DegeneracyProfile load_profile_csv(const std::string& path, double M1, double M2,
                                   std::optional<double> theta0 = {},
                                   std::optional<double> theta1 = {});

// Nodes 0 = x_0 < ... < x_n = 1 with spacing growing geometrically away from the
// clustered endpoints. Spacing ratios are capped at 1e6.
std::vector<double> graded_nodes(std::size_t n_intervals, double ratio, bool cluster0,
                                 bool cluster1);

struct Violation {
  std::string rule;
  double t = 0.0;
  double a = 0.0;
  double x = 0.0;
  double residual = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::size_t count(std::string_view rule) const;
  std::string summary() const;
};

inline constexpr std::size_t kDefaultValidationPoints = 800;
inline constexpr double kDefaultValidationRatio = 1.05;

ValidationReport validate_profile(const DegeneracyProfile& profile, std::span<const double> mesh);
ValidationReport validate_profile(const DegeneracyProfile& profile);

struct RateSet {
  std::string beta_name = "zero";
  std::string mu_name = "zero";
  std::function<double(double a, double x)> beta;
  std::function<double(double t, double a, double x)> mu;
  double a_bar = 0.0;
  double beta_sup = 0.0;
};

// beta: "zero", "constant" (value on a > a_bar), "uniform" (value at every age),
// "ramp" (value * (a - a_bar)/(A - a_bar)).
// mu: "zero", "constant", "age_linear" (value * (1 + a)).
RateSet make_rates(const std::string& beta_kind, double beta_value, double a_bar, double A,
                   const std::string& mu_kind, double mu_value);

ValidationReport validate_rates(const RateSet& rates, double T, double A, std::size_t nt = 16,
                                std::size_t na = 32, std::size_t nx = 32);

struct MemoryKernel {
  std::string name = "zero";
  std::function<double(double t, double s, double a, double x)> b;
  // Optional log|b|; lets extremely small kernels be handled without underflow.
  std::function<double(double t, double s, double a, double x)> log_abs;
  double sup_norm = 0.0;

  bool identically_zero() const { return sup_norm == 0.0; }
  double operator()(double t, double s, double a, double x) const { return b(t, s, a, x); }
};

MemoryKernel zero_kernel();
MemoryKernel constant_kernel(double c);
// amp * exp(-((t - s) - lag)^2 / (2 width^2))
MemoryKernel gaussian_kernel(double amp, double lag, double width);
// c * exp(-2 4^4 s p_norm / (T^4 (T-t)^4 a^4))
MemoryKernel admissible_decay_kernel(double c, double s_cert, double p_norm, double T);

// Exponent of the memory weight: 2 4^4 s p_norm / (T^4 (T-t)^4 a^4).
double memory_weight_log(double s, double p_norm, double T, double t, double a);

struct AdmissibilityResult {
  double sup = 0.0;  // +inf when overflow is set
  bool overflow = false;
};

inline constexpr double kLogOverflow = 700.0;

// sup over a sample grid of exp(memory_weight_log) * |b|, evaluated in log space.
AdmissibilityResult check_memory_admissibility(const MemoryKernel& kernel, double s,
                                               double p_norm, double T, double A,
                                               std::size_t nt = 16, std::size_t ns = 8,
                                               std::size_t na = 16, std::size_t nx = 8);

}  // namespace degenctrl
