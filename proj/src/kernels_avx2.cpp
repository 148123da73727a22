#include "degopt/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace degopt::kern {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

inline double hmin(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_min_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_min_sd(lo, sh));
}

double v_dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i] * y[i];
    return hsum(acc) + tail;
}

double v_dot3(const double* w, const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xy = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), xy, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += w[i] * x[i] * y[i];
    return hsum(acc) + tail;
}

double v_tri_quad(const double* d, const double* e, const double* x, const double* y,
                  std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xy = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(d + i), xy, acc);
    }
    double diag_tail = 0.0;
    for (; i < n; ++i) diag_tail += d[i] * x[i] * y[i];

    __m256d oacc = _mm256_setzero_pd();
    std::size_t m = (n >= 1) ? n - 1 : 0;
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
        __m256d xi = _mm256_loadu_pd(x + j);
        __m256d yi = _mm256_loadu_pd(y + j);
        __m256d xi1 = _mm256_loadu_pd(x + j + 1);
        __m256d yi1 = _mm256_loadu_pd(y + j + 1);
        __m256d cross = _mm256_fmadd_pd(xi, yi1, _mm256_mul_pd(xi1, yi));
        oacc = _mm256_fmadd_pd(_mm256_loadu_pd(e + j), cross, oacc);
    }
    double off_tail = 0.0;
    for (; j < m; ++j) off_tail += e[j] * (x[j] * y[j + 1] + x[j + 1] * y[j]);
    return (hsum(acc) + diag_tail) + (hsum(oacc) + off_tail);
}

void v_tri_matvec(const double* d, const double* e, const double* x, double* out, std::size_t n) {
    if (n == 0) return;
    if (n == 1) {
        out[0] = d[0] * x[0];
        return;
    }
    out[0] = d[0] * x[0] + e[0] * x[1];
    std::size_t i = 1;
    for (; i + 5 <= n; i += 4) {
        __m256d r = _mm256_mul_pd(_mm256_loadu_pd(e + i - 1), _mm256_loadu_pd(x + i - 1));
        r = _mm256_fmadd_pd(_mm256_loadu_pd(d + i), _mm256_loadu_pd(x + i), r);
        r = _mm256_fmadd_pd(_mm256_loadu_pd(e + i), _mm256_loadu_pd(x + i + 1), r);
        _mm256_storeu_pd(out + i, r);
    }
    for (; i + 1 < n; ++i) out[i] = e[i - 1] * x[i - 1] + d[i] * x[i] + e[i] * x[i + 1];
    out[n - 1] = e[n - 2] * x[n - 2] + d[n - 1] * x[n - 1];
}

void v_axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        r = _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), r);
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void v_mul(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void v_clamp(const double* x, double lo, double hi, double* out, std::size_t n) {
    __m256d vlo = _mm256_set1_pd(lo);
    __m256d vhi = _mm256_set1_pd(hi);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_max_pd(v, vlo), vhi));
    }
    for (; i < n; ++i) out[i] = std::min(std::max(x[i], lo), hi);
}

void v_multiplier_field(double alpha, const double* u, const double* y, const double* q,
                        double* out, std::size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yq = _mm256_mul_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(q + i));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(u + i), yq));
    }
    for (; i < n; ++i) out[i] = alpha * u[i] + y[i] * q[i];
}

double v_projection_gap_sq(const double* w, const double* u, const double* y, const double* q,
                           double alpha, double lo, double hi, std::size_t n) {
    __m256d vlo = _mm256_set1_pd(lo);
    __m256d vhi = _mm256_set1_pd(hi);
    __m256d vinva = _mm256_set1_pd(-1.0 / alpha);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yq = _mm256_mul_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(q + i));
        __m256d target = _mm256_min_pd(_mm256_max_pd(_mm256_mul_pd(yq, vinva), vlo), vhi);
        __m256d gap = _mm256_sub_pd(_mm256_loadu_pd(u + i), target);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(gap, gap), acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double target = std::min(std::max(y[i] * q[i] * (-1.0 / alpha), lo), hi);
        const double gap = u[i] - target;
        tail += w[i] * gap * gap;
    }
    return hsum(acc) + tail;
}

double v_max_abs(const double* x, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        m = _mm256_max_pd(m, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
    double r = hmax(m);
    for (; i < n; ++i) r = std::max(r, std::abs(x[i]));
    return r;
}

double v_min_val(const double* x, std::size_t n) {
    __m256d m = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) m = _mm256_min_pd(m, _mm256_loadu_pd(x + i));
    double r = hmin(m);
    for (; i < n; ++i) r = std::min(r, x[i]);
    return r;
}

const Kernels avx2_kernels = {
    v_dot,  v_dot3,  v_tri_quad,         v_tri_matvec,        v_axpby,   v_mul,
    v_clamp, v_multiplier_field, v_projection_gap_sq, v_max_abs, v_min_val,
};

}  // namespace

const Kernels* avx2_or_null() { return &avx2_kernels; }

}  // namespace degopt::kern

#else

namespace degopt::kern {
const Kernels* avx2_or_null() { return nullptr; }
}  // namespace degopt::kern

#endif
