#include "degenctrl/kernels.hpp"

namespace degenctrl::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void mul_accumulate(double c, std::span<const double> u, std::span<const double> v,
                    std::span<double> acc) {
  for (std::size_t i = 0; i < u.size(); ++i) acc[i] += c * u[i] * v[i];
}

}  // namespace degenctrl::kernels::scalar
