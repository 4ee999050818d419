#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "degenctrl/logsum.hpp"

namespace degenctrl {

// A nonnegative integral kept as its logarithm.
struct NamedTerm {
  std::string name;
  double log_value = -INFINITY;
  double value() const { return std::exp(log_value); }
};

// LHS / RHS of an integral inequality evaluated on a discrete solution.
struct AuditReport {
  std::string estimate;
  double s = 0.0;
  std::vector<NamedTerm> lhs;
  std::vector<NamedTerm> rhs;
  double log_lhs = -INFINITY;
  double log_rhs = -INFINITY;
  double log_C = NAN;  // log(lhs / rhs)
  bool truncated_weights = false;
  std::string note;

  double empirical_C() const { return std::exp(log_C); }
  bool finite() const { return std::isfinite(log_C); }
  // Sums the terms and fills log_lhs, log_rhs and log_C.
  void finalize();
};

inline void AuditReport::finalize() {
  LogSum l, r;
  for (const auto& t : lhs) l.add_log(t.log_value);
  for (const auto& t : rhs) r.add_log(t.log_value);
  log_lhs = l.log();
  log_rhs = r.log();
  log_C = log_lhs - log_rhs;
  if (r.empty()) log_C = l.empty() ? NAN : INFINITY;
}

}  // namespace degenctrl
