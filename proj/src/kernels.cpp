#include "degopt/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

namespace degopt::kern {

namespace {

double s_dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double s_dot3(const double* w, const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * y[i];
    return acc;
}

double s_tri_quad(const double* d, const double* e, const double* x, const double* y,
                  std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += d[i] * x[i] * y[i];
    for (std::size_t i = 0; i + 1 < n; ++i) acc += e[i] * (x[i] * y[i + 1] + x[i + 1] * y[i]);
    return acc;
}

void s_tri_matvec(const double* d, const double* e, const double* x, double* out, std::size_t n) {
    if (n == 0) return;
    if (n == 1) {
        out[0] = d[0] * x[0];
        return;
    }
    out[0] = d[0] * x[0] + e[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = e[i - 1] * x[i - 1] + d[i] * x[i] + e[i] * x[i + 1];
    out[n - 1] = e[n - 2] * x[n - 2] + d[n - 1] * x[n - 1];
}

void s_axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void s_mul(const double* x, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void s_clamp(const double* x, double lo, double hi, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::min(std::max(x[i], lo), hi);
}

void s_multiplier_field(double alpha, const double* u, const double* y, const double* q,
                        double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = alpha * u[i] + y[i] * q[i];
}

double s_projection_gap_sq(const double* w, const double* u, const double* y, const double* q,
                           double alpha, double lo, double hi, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double target = std::min(std::max(-y[i] * q[i] / alpha, lo), hi);
        const double gap = u[i] - target;
        acc += w[i] * gap * gap;
    }
    return acc;
}

double s_max_abs(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

double s_min_val(const double* x, std::size_t n) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::min(m, x[i]);
    return m;
}

const Kernels scalar_kernels = {
    s_dot,  s_dot3,  s_tri_quad,         s_tri_matvec,        s_axpby,   s_mul,
    s_clamp, s_multiplier_field, s_projection_gap_sq, s_max_abs, s_min_val,
};

struct Selection {
    const Kernels* k;
    std::string name;
};

Selection select() {
    const char* forced = std::getenv("DEGOPT_SIMD");
    if (forced && std::string(forced) == "scalar") return {&scalar_kernels, "scalar"};
#if defined(__x86_64__) || defined(_M_X64)
    const bool want_avx2 = !forced || std::string(forced) == "avx2";
    if (want_avx2 && __builtin_cpu_supports("avx2")) {
        if (const Kernels* k = avx2_or_null()) return {k, "avx2"};
    }
#endif
    return {&scalar_kernels, "scalar"};
}

const Selection& selection() {
    static const Selection s = select();
    return s;
}

}  // namespace

const Kernels& scalar() { return scalar_kernels; }

const Kernels& active() { return *selection().k; }

const std::string& active_name() { return selection().name; }

}  // namespace degopt::kern
