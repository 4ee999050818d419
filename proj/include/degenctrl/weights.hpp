#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "degenctrl/coefficients.hpp"

namespace degenctrl {

enum class Orientation { Left, Right };
std::string_view to_string(Orientation o);

// Time-age factor and the spatial profiles combined into the weighted functions.
enum class WeightKind {
  Theta,   // 1 / (t^4 (T-t)^4 a^4)
  Gamma,   // Theta frozen at T/2 for t <= T/2
  Psi,     // psi(x)
  BigPsi,  // e^{kappa rho} - e^{2 kappa |rho|}
  Phi,     // Theta psi
  Eta,     // Theta Psi
  PhiG,    // gamma psi
  Sigma    // gamma Psi
};
std::string_view to_string(WeightKind w);

// Cumulative integral C(x) = int_L^x F on [L, U], where L and U are 0 and 1
// unless the integral diverges there (then eps and 1 - eps, and truncated).
class CumulativeIntegral {
 public:
  CumulativeIntegral() = default;
  // q0, q1: local power of F at 0 and 1 (F ~ x^q0, F ~ (1-x)^q1); use a value
  // >= 0 for a regular endpoint. F_from_1(d) = F(1 - d), used near x = 1 where
  // 1 - d rounds to 1.
  CumulativeIntegral(std::function<double(double)> F, double q0, double q1,
                     std::size_t n_nodes, double ratio, double eps,
                     std::function<double(double)> F_from_1 = {});

  double operator()(double x) const;
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  double total() const { return cum_.back(); }
  bool truncated() const { return truncated_; }
  bool converged() const { return converged_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return cum_; }

 private:
  double piece(double a, double b, bool sing_a, bool sing_b) const;

  std::function<double(double)> F_;
  std::function<double(double)> F1_;
  double q0_ = 0.0, q1_ = 0.0;
  double lo_ = 0.0, hi_ = 1.0;
  bool sing_lo_ = false, sing_hi_ = false;
  bool truncated_ = false;
  mutable bool converged_ = true;
  std::vector<double> nodes_;
  std::vector<double> cum_;
};

struct PResult {
  CumulativeIntegral integral;
  double p_norm = 0.0;
  bool truncated = false;
  bool converged = true;
};

struct RhoResult {
  CumulativeIntegral integral;
  double frak_d = 0.0;     // sup |k'| over the tabulation mesh
  double rho_norm = 0.0;   // truncated value when diverges
  bool diverges = false;   // int 1/k infinite: rho computed on a truncated domain
  bool d_truncated = false;  // k' unbounded: frak_d is the mesh supremum
};

inline constexpr std::size_t kDefaultQuadPoints = 800;

// Left: p = int_0^x y/k. Right: p = int_0^x (y-1)/k.
PResult compute_p(const DegeneracyProfile& profile, Orientation o,
                  std::size_t quad_points = kDefaultQuadPoints, double eps = 1e-3);
// Left: rho = d int_x^1 1/k. Right: rho = d int_0^x 1/k.
RhoResult compute_rho(const DegeneracyProfile& profile, Orientation o,
                      std::size_t quad_points = kDefaultQuadPoints, double eps = 1e-3);
// ln(|p| + 1) / (2 |rho|); throws for infinite or nonpositive |rho|.
double kappa_max(double p_norm, double rho_norm);

struct WeightOptions {
  Orientation orientation = Orientation::Left;
  double T = 1.0;
  double A = 1.0;
  double s = 1.0;
  std::optional<double> kappa;
  std::size_t quad_points = kDefaultQuadPoints;
  double eps = 1e-3;  // truncation point used when int 1/k diverges
};

class WeightSet {
 public:
  static WeightSet build(const DegeneracyProfile& profile, const WeightOptions& opt);

  Orientation orientation() const { return opt_.orientation; }
  double T() const { return opt_.T; }
  double A() const { return opt_.A; }
  double s() const { return opt_.s; }
  double kappa() const { return kappa_; }
  double kappa_limit() const { return kappa_max_; }
  double p_norm() const { return p_.p_norm; }
  double rho_norm() const { return rho_.rho_norm; }
  double frak_d() const { return rho_.frak_d; }
  bool truncated() const { return p_.truncated || rho_.diverges; }
  bool d_truncated() const { return rho_.d_truncated; }
  bool converged() const { return p_.converged; }

  double p(double x) const;
  double rho(double x) const;
  double psi(double x) const;
  double big_psi(double x) const;
  double psi_max() const;  // psi(1) Left, psi(0) Right
  double psi_min() const;  // psi(0) Left, psi(1) Right

  double theta(double t, double a) const;  // throws std::domain_error off (0,T) x (0,A]
  double gamma(double t, double a) const;  // throws off [0,T) x (0,A]

  double eval(WeightKind w, double t, double a, double x) const;
  // log of e^{2 s W} = 2 s W
  double log_exp(WeightKind w, double t, double a, double x) const;

  // gamma(t, A) max psi
  double phi_hat(double t) const;
  // gamma(t, a) min psi
  double phi_star(double t, double a) const;

  struct Spatial {
    std::vector<double> psi;
    std::vector<double> big_psi;
  };
  Spatial sample(std::span<const double> xs) const;

 private:
  WeightOptions opt_;
  PResult p_;
  RhoResult rho_;
  double kappa_ = 0.0;
  double kappa_max_ = 0.0;
};

// Smallest s (bisection) with (s Theta)^2 e^{2 s eta} <= (s gamma)^2 e^{2 s sigma} on the sample nodes.
double ordering_threshold(const WeightSet& w, std::span<const double> ts, std::span<const double> as,
                          std::span<const double> xs);

}  // namespace degenctrl
