#include "degenctrl/coefficients.hpp"

#include <algorithm>
#include <cmath>

// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;

#include <boost/math/interpolators/pchip.hpp>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace degenctrl {

namespace {

constexpr double kRatioTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

void set_classes(DegeneracyProfile& p) {
  p.class0 = classify_exponent(p.M1);
  p.class1 = classify_exponent(p.M2);
}

}  // namespace

std::string_view to_string(EndpointClass c) {
  switch (c) {
    case EndpointClass::None:
      return "none";
    case EndpointClass::Weak:
      return "weak";
    case EndpointClass::Strong:
      return "strong";
  }
  return "?";
}

EndpointClass classify_exponent(double M) {
  if (!(M >= 0.0) || !(M < 2.0)) {
    std::ostringstream os;
    os << "degeneracy exponent " << M << " outside [0, 2)";
    throw std::invalid_argument(os.str());
  }
  if (M == 0.0) return EndpointClass::None;
  return M < 1.0 ? EndpointClass::Weak : EndpointClass::Strong;
}

double DegeneracyProfile::derivative(double x, double spacing) const {
  if (k_prime) return k_prime(x);
  const double h = 1e-6 * std::max(spacing, 1e-8);
  double lo = x - h, hi = x + h;
  if (lo < 0.0) lo = x;
  if (hi > 1.0) hi = x;
  return (k(hi) - k(lo)) / (hi - lo);
}

DegeneracyProfile power_law_profile(double M1, double M2, std::optional<double> theta0,
                                    std::optional<double> theta1) {
  DegeneracyProfile p;
  p.M1 = M1;
  p.M2 = M2;
  set_classes(p);
  std::ostringstream os;
  os << "power_law(" << M1 << "," << M2 << ")";
  p.name = os.str();
  p.k = [M1, M2](double x) { return std::pow(x, M1) * std::pow(1.0 - x, M2); };
  p.k_from_1 = [M1, M2](double d) { return std::pow(1.0 - d, M1) * std::pow(d, M2); };
  p.k_prime = [M1, M2](double x) {
    double d = 0.0;
    if (M1 != 0.0) d += M1 * std::pow(x, M1 - 1.0) * std::pow(1.0 - x, M2);
    if (M2 != 0.0) d -= M2 * std::pow(x, M1) * std::pow(1.0 - x, M2 - 1.0);
    return d;
  };
  // k / x^M1 = (1-x)^M2 decreases when M2 > 0, so the default backs off to M1 / 2.
  if (p.class0 == EndpointClass::Strong) p.theta0 = theta0.value_or(M2 > 0.0 ? 0.5 * M1 : M1);
  if (p.class1 == EndpointClass::Strong) p.theta1 = theta1.value_or(M1 > 0.0 ? 0.5 * M2 : M2);
  return p;
}

DegeneracyProfile constant_profile(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("constant profile needs c > 0");
  DegeneracyProfile p;
  p.name = "constant";
  p.k = [c](double) { return c; };
  p.k_prime = [](double) { return 0.0; };
  return p;
}

DegeneracyProfile tabulated_profile(std::vector<double> x, std::vector<double> k, double M1,
                                    double M2, std::optional<double> theta0,
                                    std::optional<double> theta1) {
  if (x.size() != k.size() || x.size() < 4)
    throw std::invalid_argument("tabulated profile needs at least 4 (x, k) pairs");
  if (x.front() != 0.0 || x.back() != 1.0)
    throw std::invalid_argument("tabulated profile must span [0, 1]");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("tabulated x must be increasing");
  DegeneracyProfile p;
  p.name = "tabulated";
  p.M1 = M1;
  p.M2 = M2;
  set_classes(p);
  p.theta0 = theta0;
  p.theta1 = theta1;
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  auto interp = std::make_shared<Pchip>(std::move(x), std::move(k));
  p.k = [interp](double t) { return std::max(0.0, (*interp)(std::clamp(t, 0.0, 1.0))); };
  p.k_prime = [interp](double t) { return interp->prime(std::clamp(t, 0.0, 1.0)); };
  return p;
}

DegeneracyProfile load_profile_csv(const std::string& path, double M1, double M2,
                                   std::optional<double> theta0, std::optional<double> theta1) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile table " + path);
  std::vector<double> xs, ks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double xv, kv;
    if (!(ls >> xv >> kv)) {
      if (xs.empty()) continue;  // header
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'x,k'");
    }
    xs.push_back(xv);
    ks.push_back(kv);
  }
  auto p = tabulated_profile(std::move(xs), std::move(ks), M1, M2, theta0, theta1);
  p.name = "tabulated:" + path;
  return p;
}

std::vector<double> graded_nodes(std::size_t n, double ratio, bool cluster0, bool cluster1) {
  if (n == 0) throw std::invalid_argument("graded_nodes needs at least one interval");
  if (!(ratio >= 1.0)) throw std::invalid_argument("grading ratio must be >= 1");
  const double cap = std::log(1e6) / std::log(std::max(ratio, 1.0 + 1e-15));
  auto growth = [&](std::size_t i) { return std::pow(ratio, std::min<double>(i, cap)); };
  std::vector<double> h(n);
  if (cluster0 && cluster1) {
    for (std::size_t i = 0; i < n; ++i) h[i] = growth(std::min(i, n - 1 - i));
  } else if (cluster0) {
    for (std::size_t i = 0; i < n; ++i) h[i] = growth(i);
  } else if (cluster1) {
    for (std::size_t i = 0; i < n; ++i) h[i] = growth(n - 1 - i);
  } else {
    std::fill(h.begin(), h.end(), 1.0);
  }
  double total = 0.0;
  for (double v : h) total += v;
  std::vector<double> nodes(n + 1);
  nodes[0] = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += h[i];
    nodes[i + 1] = acc / total;
  }
  nodes[n] = 1.0;
  return nodes;
}

std::size_t ValidationReport::count(std::string_view rule) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; }));
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream os;
  std::vector<std::string> rules;
  for (const auto& v : violations)
    if (std::find(rules.begin(), rules.end(), v.rule) == rules.end()) rules.push_back(v.rule);
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (i) os << "; ";
    const auto it = std::find_if(violations.begin(), violations.end(),
                                 [&](const Violation& v) { return v.rule == rules[i]; });
    os << rules[i] << " x" << count(rules[i]) << " (first at t=" << it->t << " a=" << it->a
       << " x=" << it->x << ", residual " << it->residual << ")";
  }
  return os.str();
}

ValidationReport validate_profile(const DegeneracyProfile& p, std::span<const double> mesh) {
  ValidationReport rep;
  auto add = [&](std::string rule, double x, double r) {
    rep.violations.push_back({std::move(rule), 0.0, 0.0, x, r});
  };

  auto check_class = [&](double M, EndpointClass c, std::optional<double> theta, double where,
                         const char* tag) {
    const std::string side(tag);
    if (!(M >= 0.0 && M < 2.0)) {
      add("exponent_range_" + side, where, M);
      return;
    }
    if (c == EndpointClass::Weak && !(M > 0.0 && M < 1.0)) add("exponent_class_" + side, where, M);
    if (c == EndpointClass::Strong && !(M >= 1.0 && M < 2.0))
      add("exponent_class_" + side, where, M);
    if (c == EndpointClass::None && M != 0.0) add("exponent_class_" + side, where, M);
    const double kend = p.k(where);
    if (c != EndpointClass::None && !(std::fabs(kend) <= 1e-12)) add("degeneracy_" + side, where, kend);
    if (c == EndpointClass::None && !(kend > 0.0)) add("degeneracy_" + side, where, kend);
    if (c == EndpointClass::Strong) {
      if (!theta)
        add("theta_missing_" + side, where, 0.0);
      else if (!(*theta > 0.0 && *theta <= M))
        add("theta_range_" + side, where, *theta);
    }
  };
  check_class(p.M1, p.class0, p.theta0, 0.0, "0");
  check_class(p.M2, p.class1, p.theta1, 1.0, "1");

  const std::size_t n = mesh.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = mesh[i];
    if (x <= 0.0 || x >= 1.0) continue;
    double spacing = 1.0;
    if (i > 0) spacing = std::min(spacing, x - mesh[i - 1]);
    if (i + 1 < n) spacing = std::min(spacing, mesh[i + 1] - x);
    const double kv = p.k(x);
    if (!(kv > 0.0) || !std::isfinite(kv)) {
      add("k_positive", x, kv);
      continue;
    }
    const double dk = p.derivative(x, spacing);
    const double r0 = x * dk / kv - p.M1;
    if (r0 > kRatioTol) add("upper_bound_0", x, r0);
    const double r1 = (x - 1.0) * dk / kv - p.M2;
    if (r1 > kRatioTol) add("upper_bound_1", x, r1);
  }

  // k / x^theta nondecreasing near 0; k / (1-x)^theta nondecreasing in the distance to 1.
  std::vector<double> interior;
  for (double x : mesh)
    if (x > 0.0 && x < 1.0) interior.push_back(x);
  std::sort(interior.begin(), interior.end());
  const std::size_t band = std::max<std::size_t>(2, interior.size() / 10);
  if (p.class0 == EndpointClass::Strong && p.theta0 && interior.size() >= 2) {
    const double th = *p.theta0;
    double prev = -kInf;
    for (std::size_t i = 0; i < std::min(band, interior.size()); ++i) {
      const double x = interior[i];
      const double g = p.k(x) / std::pow(x, th);
      if (g < prev * (1.0 - kRatioTol)) add("monotone_0", x, g - prev);
      prev = g;
    }
  }
  if (p.class1 == EndpointClass::Strong && p.theta1 && interior.size() >= 2) {
    const double th = *p.theta1;
    double prev = -kInf;
    for (std::size_t c = 0; c < std::min(band, interior.size()); ++c) {
      const double x = interior[interior.size() - 1 - c];
      const double g = p.k(x) / std::pow(1.0 - x, th);
      if (g < prev * (1.0 - kRatioTol)) add("monotone_1", x, g - prev);
      prev = g;
    }
  }
  return rep;
}

ValidationReport validate_profile(const DegeneracyProfile& p) {
  const auto nodes = graded_nodes(kDefaultValidationPoints + 1, kDefaultValidationRatio,
                                  p.degenerate_at_0(), p.degenerate_at_1());
  std::vector<double> interior(nodes.begin() + 1, nodes.end() - 1);
  return validate_profile(p, interior);
}

RateSet make_rates(const std::string& beta_kind, double beta_value, double a_bar, double A,
                   const std::string& mu_kind, double mu_value) {
  RateSet r;
  r.a_bar = a_bar;
  r.beta_name = beta_kind;
  r.mu_name = mu_kind;
  if (beta_kind == "zero") {
    r.beta = [](double, double) { return 0.0; };
    r.beta_sup = 0.0;
  } else if (beta_kind == "constant") {
    r.beta = [beta_value, a_bar](double a, double) { return a > a_bar ? beta_value : 0.0; };
    r.beta_sup = std::fabs(beta_value);
  } else if (beta_kind == "uniform") {
    r.beta = [beta_value](double, double) { return beta_value; };
    r.beta_sup = std::fabs(beta_value);
  } else if (beta_kind == "ramp") {
    const double span = A - a_bar;
    if (!(span > 0.0)) throw std::invalid_argument("ramp fertility needs a_bar < A");
    r.beta = [beta_value, a_bar, span](double a, double) {
      return a > a_bar ? beta_value * (a - a_bar) / span : 0.0;
    };
    r.beta_sup = std::fabs(beta_value);
  } else {
    throw std::invalid_argument("unknown fertility kind '" + beta_kind + "'");
  }
  if (mu_kind == "zero") {
    r.mu = [](double, double, double) { return 0.0; };
  } else if (mu_kind == "constant") {
    r.mu = [mu_value](double, double, double) { return mu_value; };
  } else if (mu_kind == "age_linear") {
    r.mu = [mu_value](double, double a, double) { return mu_value * (1.0 + a); };
  } else {
    throw std::invalid_argument("unknown mortality kind '" + mu_kind + "'");
  }
  return r;
}

ValidationReport validate_rates(const RateSet& r, double T, double A, std::size_t nt,
                                std::size_t na, std::size_t nx) {
  ValidationReport rep;
  if (!(r.a_bar > 0.0 && r.a_bar <= A)) rep.violations.push_back({"a_bar_range", 0, r.a_bar, 0, r.a_bar});
  if (r.a_bar > T) rep.violations.push_back({"a_bar_exceeds_T", T, r.a_bar, 0, r.a_bar - T});
  for (std::size_t j = 0; j <= na; ++j) {
    const double a = A * static_cast<double>(j) / static_cast<double>(na);
    for (std::size_t i = 0; i <= nx; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(nx);
      const double b = r.beta(a, x);
      if (!std::isfinite(b) || b < 0.0) rep.violations.push_back({"beta_nonnegative", 0, a, x, b});
      if (a <= r.a_bar && b != 0.0) rep.violations.push_back({"beta_fertility_window", 0, a, x, b});
      for (std::size_t n = 0; n <= nt; ++n) {
        const double t = T * static_cast<double>(n) / static_cast<double>(nt);
        const double m = r.mu(t, a, x);
        if (!std::isfinite(m) || m < 0.0) rep.violations.push_back({"mu_nonnegative", t, a, x, m});
      }
    }
  }
  return rep;
}

MemoryKernel zero_kernel() {
  MemoryKernel k;
  k.name = "zero";
  k.b = [](double, double, double, double) { return 0.0; };
  k.log_abs = [](double, double, double, double) { return -kInf; };
  k.sup_norm = 0.0;
  return k;
}

MemoryKernel constant_kernel(double c) {
  MemoryKernel k;
  k.name = "constant";
  k.b = [c](double, double, double, double) { return c; };
  k.sup_norm = std::fabs(c);
  return k;
}

MemoryKernel gaussian_kernel(double amp, double lag, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian kernel width must be positive");
  MemoryKernel k;
  k.name = "gaussian_kernel";
  k.b = [amp, lag, width](double t, double s, double, double) {
    const double z = (t - s - lag) / width;
    return amp * std::exp(-0.5 * z * z);
  };
  k.sup_norm = std::fabs(amp);
  return k;
}

double memory_weight_log(double s, double p_norm, double T, double t, double a) {
  const double q = T * (T - t) * a;
  return 2.0 * 256.0 * s * p_norm / (q * q * q * q);
}

MemoryKernel admissible_decay_kernel(double c, double s_cert, double p_norm, double T) {
  MemoryKernel k;
  k.name = "admissible_decay_kernel";
  k.log_abs = [c, s_cert, p_norm, T](double t, double, double a, double) {
    if (c == 0.0 || t >= T || a <= 0.0) return -kInf;
    return std::log(std::fabs(c)) - memory_weight_log(s_cert, p_norm, T, t, a);
  };
  k.b = [c, s_cert, p_norm, T](double t, double, double a, double) {
    if (t >= T || a <= 0.0) return 0.0;
    return c * std::exp(-memory_weight_log(s_cert, p_norm, T, t, a));
  };
  k.sup_norm = std::fabs(c);
  return k;
}

AdmissibilityResult check_memory_admissibility(const MemoryKernel& kernel, double s,
                                               double p_norm, double T, double A,
                                               std::size_t nt, std::size_t ns, std::size_t na,
                                               std::size_t nx) {
  AdmissibilityResult res;
  double best = -kInf;
  for (std::size_t n = 0; n < nt; ++n) {
    const double t = T * (static_cast<double>(n) + 0.5) / static_cast<double>(nt);
    for (std::size_t m = 0; m <= ns; ++m) {
      const double sv = t * static_cast<double>(m) / static_cast<double>(ns);
      for (std::size_t j = 0; j < na; ++j) {
        const double a = A * (static_cast<double>(j) + 0.5) / static_cast<double>(na);
        const double lw = memory_weight_log(s, p_norm, T, t, a);
        for (std::size_t i = 0; i <= nx; ++i) {
          const double x = static_cast<double>(i) / static_cast<double>(nx);
          double lb;
          if (kernel.log_abs) {
            lb = kernel.log_abs(t, sv, a, x);
          } else {
            const double b = std::fabs(kernel.b(t, sv, a, x));
            lb = b == 0.0 ? -kInf : std::log(b);
          }
          if (lb == -kInf) continue;
          best = std::max(best, lw + lb);
        }
      }
    }
  }
  if (best > kLogOverflow) {
    res.overflow = true;
    res.sup = kInf;
  } else {
    res.sup = best == -kInf ? 0.0 : std::exp(best);
  }
  return res;
}

}  // namespace degenctrl
