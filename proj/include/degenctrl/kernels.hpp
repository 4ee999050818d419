#pragma once

#include <span>
#include <string_view>

// Dense reductions and updates used by the solvers. Every routine has a
// scalar reference implementation; an AVX2 variant is selected at runtime
// when the CPU supports it. DEGENCTRL_SIMD=scalar forces the reference path.
namespace degenctrl::kernels {

enum class Isa { Scalar, Avx2 };

Isa active_isa();
void set_isa(Isa isa);  // throws if the ISA is unavailable on this CPU
bool isa_available(Isa isa);
std::string_view isa_name(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
// sum_i w_i a_i b_i
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// acc += c * u * v (elementwise)
void mul_accumulate(double c, std::span<const double> u, std::span<const double> v,
                    std::span<double> acc);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void mul_accumulate(double c, std::span<const double> u, std::span<const double> v,
                    std::span<double> acc);
}  // namespace scalar

#ifdef DEGENCTRL_HAVE_AVX2
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void mul_accumulate(double c, std::span<const double> u, std::span<const double> v,
                    std::span<double> acc);
}  // namespace avx2
#endif

}  // namespace degenctrl::kernels
