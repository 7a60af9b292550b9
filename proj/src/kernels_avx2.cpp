// AVX2 + FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and only dispatched to after a runtime cpuid check.

#include "fxvol/kernels.hpp"

#if FXVOL_HAVE_AVX2_TU

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace fxvol::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double sum_squares_avx2(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d a = _mm256_loadu_pd(x + i);
        const __m256d b = _mm256_loadu_pd(x + i + 4);
        acc0 = _mm256_fmadd_pd(a, a, acc0);
        acc1 = _mm256_fmadd_pd(b, b, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_loadu_pd(x + i);
        acc0 = _mm256_fmadd_pd(a, a, acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double abs_lag_prod_sum_avx2(const double* x, std::size_t n, std::size_t lag) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d acc0 = _mm256_setzero_pd();
    std::size_t i = lag;
    for (; i + 4 <= n; i += 4) {
        const __m256d a = _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i));
        const __m256d b = _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i - lag));
        acc0 = _mm256_fmadd_pd(a, b, acc0);
    }
    double acc = hsum(acc0);
    for (; i < n; ++i) acc += std::fabs(x[i]) * std::fabs(x[i - lag]);
    return acc;
}

void modwt_step_avx2(const double* v, std::size_t n, const double* h,
                     const double* g, std::size_t taps, std::size_t stride,
                     double* w, double* s) {
    const std::size_t step = stride % n;
    const std::size_t reach = stride * (taps - 1);

    // Positions t >= stride*(taps-1) read v[t - stride*l] without wrapping;
    // vectorize those four at a time. The wrap region falls back to the
    // modular walk.
    std::size_t t = 0;
    const std::size_t safe_begin = (reach < n) ? reach : n;
    for (; t < safe_begin; ++t) {
        double aw = 0.0;
        double as = 0.0;
        std::size_t idx = t;
        for (std::size_t l = 0; l < taps; ++l) {
            aw += h[l] * v[idx];
            as += g[l] * v[idx];
            idx = (idx >= step) ? idx - step : idx + n - step;
        }
        w[t] = aw;
        s[t] = as;
    }
    for (; t + 4 <= n; t += 4) {
        __m256d aw = _mm256_setzero_pd();
        __m256d as = _mm256_setzero_pd();
        for (std::size_t l = 0; l < taps; ++l) {
            const __m256d vv = _mm256_loadu_pd(v + t - stride * l);
            aw = _mm256_fmadd_pd(_mm256_set1_pd(h[l]), vv, aw);
            as = _mm256_fmadd_pd(_mm256_set1_pd(g[l]), vv, as);
        }
        _mm256_storeu_pd(w + t, aw);
        _mm256_storeu_pd(s + t, as);
    }
    for (; t < n; ++t) {
        double aw = 0.0;
        double as = 0.0;
        std::size_t idx = t;
        for (std::size_t l = 0; l < taps; ++l) {
            aw += h[l] * v[idx];
            as += g[l] * v[idx];
            idx = (idx >= step) ? idx - step : idx + n - step;
        }
        w[t] = aw;
        s[t] = as;
    }
}

}  // namespace

const Ops avx2_ops = {sum_squares_avx2, dot_avx2, abs_lag_prod_sum_avx2,
                      modwt_step_avx2};

}  // namespace fxvol::kernels::detail

#endif  // FXVOL_HAVE_AVX2_TU
