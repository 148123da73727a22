#pragma once

#include <cstddef>
#include <string>

namespace degopt::kern {

// Data-parallel primitives used by the assembly, solver and optimizer inner
// loops. Every kernel has a scalar reference implementation and, on x86-64
// with AVX2, a vectorized variant selected once at process start. The active
// backend can be forced with the environment variable DEGOPT_SIMD=scalar|avx2.
//
// The tridiagonal *solve* is deliberately absent: its recurrence is
// sequential (see la.hpp).
struct Kernels {
    // sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum_i w[i]*x[i]*y[i]
    double (*dot3)(const double* w, const double* x, const double* y, std::size_t n);
    // x' T y for symmetric tridiagonal T = (diag d[0..n-1], off e[0..n-2]).
    // Evaluated as sum d*x*y + sum e*(x_i*y_{i+1} + x_{i+1}*y_i), which is
    // commutative in (x,y) at floating-point level.
    double (*tri_quad)(const double* d, const double* e, const double* x, const double* y,
                       std::size_t n);
    // out = T x for the same symmetric tridiagonal layout.
    void (*tri_matvec)(const double* d, const double* e, const double* x, double* out,
                       std::size_t n);
    // out[i] = a*x[i] + b*y[i]
    void (*axpby)(double a, const double* x, double b, const double* y, double* out,
                  std::size_t n);
    // out[i] = x[i]*y[i]
    void (*mul)(const double* x, const double* y, double* out, std::size_t n);
    // out[i] = min(max(x[i], lo), hi)
    void (*clamp)(const double* x, double lo, double hi, double* out, std::size_t n);
    // out[i] = alpha*u[i] + y[i]*q[i]  (multiplier field of the reduced problem)
    void (*multiplier_field)(double alpha, const double* u, const double* y, const double* q,
                             double* out, std::size_t n);
    // sum_i w[i] * (u[i] - clamp(-y[i]*q[i]/alpha, lo, hi))^2
    double (*projection_gap_sq)(const double* w, const double* u, const double* y,
                                const double* q, double alpha, double lo, double hi,
                                std::size_t n);
    // max_i |x[i]|  (0 for n = 0)
    double (*max_abs)(const double* x, std::size_t n);
    // min_i x[i]  (+inf for n = 0)
    double (*min_val)(const double* x, std::size_t n);
};

// Scalar reference backend; always available.
const Kernels& scalar();

// Backend chosen for this process (AVX2 when supported, else scalar).
const Kernels& active();

// Name of the active backend ("scalar" or "avx2"); recorded in artifacts.
const std::string& active_name();

// AVX2 backend; only valid to call when compiled in and supported by the CPU.
// Exposed for the equivalence tests.
const Kernels* avx2_or_null();

}  // namespace degopt::kern
