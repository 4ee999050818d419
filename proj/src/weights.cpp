#include "degenctrl/weights.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace degenctrl {

namespace {

constexpr double kQuadTol = 1e-12;
constexpr int kMaxHalvings = 10;

using Gauss = boost::math::quadrature::gauss<double, 20>;

// Gauss-Legendre on [a, b] checked against the two halves; bisects until they agree.
double gl(const std::function<double(double)>& f, double a, double b, double whole, int depth,
          bool& converged) {
  const double m = 0.5 * (a + b);
  const double left = Gauss::integrate(f, a, m);
  const double right = Gauss::integrate(f, m, b);
  const double both = left + right;
  if (std::fabs(both - whole) <= kQuadTol * std::max(std::fabs(both), 1e-300)) return both;
  if (depth >= kMaxHalvings) {
    converged = false;
    return both;
  }
  return gl(f, a, m, left, depth + 1, converged) + gl(f, m, b, right, depth + 1, converged);
}

double quad(const std::function<double(double)>& f, double a, double b, bool& converged) {
  return gl(f, a, b, Gauss::integrate(f, a, b), 0, converged);
}

// Power m so that x = u^m turns x^q into a polynomial in u (m >= 1).
double substitution_power(double q) { return std::ceil(q + 1.0) / (q + 1.0); }

bool needs_substitution(double q) { return q < 0.0 || q != std::floor(q); }

}  // namespace

std::string_view to_string(Orientation o) { return o == Orientation::Left ? "left" : "right"; }

std::string_view to_string(WeightKind w) {
  switch (w) {
    case WeightKind::Theta: return "Theta";
    case WeightKind::Gamma: return "gamma";
    case WeightKind::Psi: return "psi";
    case WeightKind::BigPsi: return "Psi";
    case WeightKind::Phi: return "phi";
    case WeightKind::Eta: return "eta";
    case WeightKind::PhiG: return "Phi";
    case WeightKind::Sigma: return "sigma";
  }
  return "?";
}

CumulativeIntegral::CumulativeIntegral(std::function<double(double)> F, double q0, double q1,
                                       std::size_t n_nodes, double ratio, double eps,
                                       std::function<double(double)> F_from_1)
    : F_(std::move(F)), F1_(std::move(F_from_1)), q0_(q0), q1_(q1) {
  if (!F1_) F1_ = [F = F_](double d) { return F(1.0 - d); };
  if (n_nodes < 2) throw std::invalid_argument("tabulation needs at least 2 intervals");
  if (q0 <= -1.0) {
    lo_ = eps;
    truncated_ = true;
  } else {
    sing_lo_ = needs_substitution(q0);
  }
  if (q1 <= -1.0) {
    hi_ = 1.0 - eps;
    truncated_ = true;
  } else {
    sing_hi_ = needs_substitution(q1);
  }
  if (!(hi_ > lo_)) throw std::invalid_argument("truncation point leaves an empty domain");
  const auto unit = graded_nodes(n_nodes, ratio, q0 < 1.0, q1 < 1.0);
  nodes_.resize(unit.size());
  for (std::size_t i = 0; i < unit.size(); ++i) nodes_[i] = lo_ + (hi_ - lo_) * unit[i];
  nodes_.back() = hi_;
  cum_.assign(nodes_.size(), 0.0);
  const std::size_t last = nodes_.size() - 2;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
    cum_[i + 1] = cum_[i] + piece(nodes_[i], nodes_[i + 1], i == 0 && sing_lo_, i == last && sing_hi_);
}

double CumulativeIntegral::piece(double a, double b, bool sing_a, bool sing_b) const {
  if (!(b > a)) return 0.0;
  if (sing_a && sing_b) {
    const double m = 0.5 * (a + b);
    return piece(a, m, true, false) + piece(m, b, false, true);
  }
  const double L = b - a;
  if (sing_a) {
    const double m = substitution_power(q0_);
    auto g = [&](double u) { return F_(a + L * std::pow(u, m)) * L * m * std::pow(u, m - 1.0); };
    return quad(g, 0.0, 1.0, converged_);
  }
  if (sing_b) {
    const double m = substitution_power(q1_);
    // b is 1 here: singular right pieces only exist without truncation.
    auto g = [&](double u) {
      const double d = (1.0 - b) + L * std::pow(u, m);
      return F1_(d) * L * m * std::pow(u, m - 1.0);
    };
    return quad(g, 0.0, 1.0, converged_);
  }
  return quad(F_, a, b, converged_);
}

double CumulativeIntegral::operator()(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return cum_.back();
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  if (x == nodes_[i]) return cum_[i];
  const std::size_t last = nodes_.size() - 2;
  if (i == last && sing_hi_) return cum_.back() - piece(x, hi_, false, true);
  return cum_[i] + piece(nodes_[i], x, i == 0 && sing_lo_, false);
}

PResult compute_p(const DegeneracyProfile& profile, Orientation o, std::size_t quad_points,
                  double eps) {
  PResult r;
  auto k = profile.k;
  auto k1 = [profile](double d) { return profile.k_at_distance_from_1(d); };
  if (o == Orientation::Left) {
    r.integral = CumulativeIntegral([k](double y) { return y / k(y); }, 1.0 - profile.M1,
                                    -profile.M2, quad_points, kDefaultValidationRatio, eps,
                                    [k1](double d) { return (1.0 - d) / k1(d); });
  } else {
    r.integral = CumulativeIntegral([k](double y) { return (y - 1.0) / k(y); }, -profile.M1,
                                    1.0 - profile.M2, quad_points, kDefaultValidationRatio, eps,
                                    [k1](double d) { return -d / k1(d); });
  }
  r.p_norm = std::fabs(r.integral.total());
  r.truncated = r.integral.truncated();
  r.converged = r.integral.converged();
  return r;
}

RhoResult compute_rho(const DegeneracyProfile& profile, Orientation, std::size_t quad_points,
                      double eps) {
  RhoResult r;
  auto k = profile.k;
  auto k1 = [profile](double d) { return profile.k_at_distance_from_1(d); };
  r.integral = CumulativeIntegral([k](double y) { return 1.0 / k(y); }, -profile.M1, -profile.M2,
                                  quad_points, kDefaultValidationRatio, eps,
                                  [k1](double d) { return 1.0 / k1(d); });
  r.diverges = r.integral.truncated();
  const auto& nodes = r.integral.nodes();
  double d = 0.0;
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
    const double h = std::min(nodes[i] - nodes[i - 1], nodes[i + 1] - nodes[i]);
    d = std::max(d, std::fabs(profile.derivative(nodes[i], h)));
  }
  r.frak_d = d;
  r.d_truncated = profile.class0 == EndpointClass::Weak || profile.class1 == EndpointClass::Weak;
  r.rho_norm = d * r.integral.total();
  return r;
}

double kappa_max(double p_norm, double rho_norm) {
  if (!std::isfinite(rho_norm))
    throw std::domain_error("|rho| is infinite; kappa_max undefined (use the truncated domain)");
  if (!(rho_norm > 0.0)) throw std::domain_error("|rho| must be positive for kappa_max");
  return std::log(p_norm + 1.0) / (2.0 * rho_norm);
}

WeightSet WeightSet::build(const DegeneracyProfile& profile, const WeightOptions& opt) {
  if (!(opt.T > 0.0) || !(opt.A > 0.0)) throw std::invalid_argument("T and A must be positive");
  if (!(opt.s > 0.0)) throw std::invalid_argument("s must be positive");
  WeightSet w;
  w.opt_ = opt;
  w.p_ = compute_p(profile, opt.orientation, opt.quad_points, opt.eps);
  w.rho_ = compute_rho(profile, opt.orientation, opt.quad_points, opt.eps);
  w.kappa_max_ = kappa_max(w.p_.p_norm, w.rho_.rho_norm);
  if (opt.kappa) {
    if (!(*opt.kappa > 0.0) || *opt.kappa > w.kappa_max_ * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "kappa " << *opt.kappa << " outside (0, " << w.kappa_max_ << "]";
      throw std::invalid_argument(os.str());
    }
    w.kappa_ = *opt.kappa;
  } else {
    w.kappa_ = w.kappa_max_;
  }
  return w;
}

double WeightSet::p(double x) const { return p_.integral(x); }

double WeightSet::rho(double x) const {
  const auto& c = rho_.integral;
  return opt_.orientation == Orientation::Left ? rho_.frak_d * (c.total() - c(x))
                                               : rho_.frak_d * c(x);
}

double WeightSet::psi(double x) const { return p(x) - 2.0 * p_.p_norm; }

double WeightSet::big_psi(double x) const {
  return std::exp(kappa_ * rho(x)) - std::exp(2.0 * kappa_ * rho_.rho_norm);
}

double WeightSet::psi_max() const {
  return opt_.orientation == Orientation::Left ? -p_.p_norm : -2.0 * p_.p_norm;
}

double WeightSet::psi_min() const {
  return opt_.orientation == Orientation::Left ? -2.0 * p_.p_norm : -3.0 * p_.p_norm;
}

double WeightSet::theta(double t, double a) const {
  if (!(t > 0.0 && t < opt_.T) || !(a > 0.0 && a <= opt_.A)) {
    std::ostringstream os;
    os << "Theta evaluated outside (0,T)x(0,A]: t=" << t << " a=" << a;
    throw std::domain_error(os.str());
  }
  const double q = t * (opt_.T - t) * a;
  const double q2 = q * q;
  return 1.0 / (q2 * q2);
}

double WeightSet::gamma(double t, double a) const {
  if (!(t >= 0.0 && t < opt_.T) || !(a > 0.0 && a <= opt_.A)) {
    std::ostringstream os;
    os << "gamma evaluated outside [0,T)x(0,A]: t=" << t << " a=" << a;
    throw std::domain_error(os.str());
  }
  return theta(std::max(t, 0.5 * opt_.T), a);
}

double WeightSet::eval(WeightKind w, double t, double a, double x) const {
  switch (w) {
    case WeightKind::Theta: return theta(t, a);
    case WeightKind::Gamma: return gamma(t, a);
    case WeightKind::Psi: return psi(x);
    case WeightKind::BigPsi: return big_psi(x);
    case WeightKind::Phi: return theta(t, a) * psi(x);
    case WeightKind::Eta: return theta(t, a) * big_psi(x);
    case WeightKind::PhiG: return gamma(t, a) * psi(x);
    case WeightKind::Sigma: return gamma(t, a) * big_psi(x);
  }
  return 0.0;
}

double WeightSet::log_exp(WeightKind w, double t, double a, double x) const {
  return 2.0 * opt_.s * eval(w, t, a, x);
}

double WeightSet::phi_hat(double t) const { return gamma(t, opt_.A) * psi_max(); }

double WeightSet::phi_star(double t, double a) const { return gamma(t, a) * psi_min(); }

WeightSet::Spatial WeightSet::sample(std::span<const double> xs) const {
  Spatial s;
  s.psi.reserve(xs.size());
  s.big_psi.reserve(xs.size());
  for (double x : xs) {
    s.psi.push_back(psi(x));
    s.big_psi.push_back(big_psi(x));
  }
  return s;
}

double ordering_threshold(const WeightSet& w, std::span<const double> ts,
                          std::span<const double> as, std::span<const double> xs) {
  const auto sp = w.sample(xs);
  auto holds = [&](double s) {
    for (double t : ts)
      for (double a : as) {
        const double th = w.theta(t, a), ga = w.gamma(t, a);
        for (double bp : sp.big_psi) {
          const double lhs = 2.0 * std::log(s * th) + 2.0 * s * th * bp;
          const double rhs = 2.0 * std::log(s * ga) + 2.0 * s * ga * bp;
          if (lhs > rhs + 1e-12 * std::fabs(rhs)) return false;
        }
      }
    return true;
  };
  double lo = 1e-12, hi = 1e12;
  if (holds(lo)) return lo;
  if (!holds(hi)) return std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (holds(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace degenctrl
