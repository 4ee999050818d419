#pragma once

#include <limits>

namespace degenctrl {

// Sum of nonnegative terms given by their logarithms. Terms are rescaled
// against the running maximum and combined with Neumaier compensation, so
// exp(-1e4) sized contributions keep full relative precision.
class LogSum {
 public:
  void add_log(double log_term);
  void add(double term);  // term >= 0
  void merge(const LogSum& other);
  double log() const;
  double value() const;  // may underflow to 0
  bool empty() const { return ref_ == -std::numeric_limits<double>::infinity(); }

 private:
  double ref_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace degenctrl
