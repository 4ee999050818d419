#include "degenctrl/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace degenctrl::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("DEGENCTRL_SIMD"); env && std::strcmp(env, "scalar") == 0)
    return Isa::Scalar;
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  return Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(DEGENCTRL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_available(isa)) throw std::runtime_error("requested SIMD variant is not available");
  current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

#ifdef DEGENCTRL_HAVE_AVX2
#define DISPATCH(fn, ...)                                              \
  (active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(std::span<const double> a, std::span<const double> b) { return DISPATCH(dot, a, b); }

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  return DISPATCH(weighted_dot, w, a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  DISPATCH(axpy, alpha, x, y);
}

void mul_accumulate(double c, std::span<const double> u, std::span<const double> v,
                    std::span<double> acc) {
  DISPATCH(mul_accumulate, c, u, v, acc);
}

#undef DISPATCH

}  // namespace degenctrl::kernels
