#include "degenctrl/logsum.hpp"

#include <cmath>

namespace degenctrl {

void LogSum::add_log(double l) {
  if (std::isnan(l)) {
    ref_ = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  if (l == -std::numeric_limits<double>::infinity()) return;
  if (l > ref_) {
    const double scale = std::exp(ref_ - l);
    sum_ *= scale;
    comp_ *= scale;
    ref_ = l;
  }
  const double x = std::exp(l - ref_);
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

void LogSum::add(double term) {
  if (term > 0.0) add_log(std::log(term));
}

void LogSum::merge(const LogSum& other) {
  if (other.empty()) return;
  add_log(other.log());
}

double LogSum::log() const {
  if (empty()) return ref_;
  return ref_ + std::log(sum_ + comp_);
}

double LogSum::value() const { return empty() ? 0.0 : std::exp(log()); }

}  // namespace degenctrl
