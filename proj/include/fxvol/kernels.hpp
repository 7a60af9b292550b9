#pragma once

#include <cstddef>
#include <span>

namespace fxvol::kernels {

// Data-parallel inner loops shared by the realized-measure estimators and
// the wavelet transform. Every kernel has a scalar reference implementation
// and, on x86-64, an AVX2+FMA variant selected at runtime. The two are
// equivalence-tested against each other; accumulation order differs, so
// agreement is to rounding, not bit-exact.

enum class Backend { scalar, avx2 };

Backend active_backend();
bool backend_available(Backend b);
const char* backend_name(Backend b);

// Test hook. Throws std::invalid_argument if the backend is unavailable.
void force_backend(Backend b);
void reset_backend();

// sum of x[i]^2
double sum_squares(std::span<const double> x);

// sum of a[i] * b[i]; sizes must match
double dot(std::span<const double> a, std::span<const double> b);

// sum over i >= lag of |x[i]| * |x[i - lag]|
double abs_lag_prod_sum(std::span<const double> x, std::size_t lag);

// One analysis stage of the non-decimated wavelet pyramid with circular
// boundary:
//   w[t] = sum_l h[l] * v[(t - stride*l) mod n]
//   s[t] = sum_l g[l] * v[(t - stride*l) mod n]
// h and g must have equal length. w and s must have the same size as v.
void modwt_step(std::span<const double> v, std::span<const double> h,
                std::span<const double> g, std::size_t stride,
                std::span<double> w, std::span<double> s);

namespace detail {
struct Ops {
    double (*sum_squares)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*abs_lag_prod_sum)(const double*, std::size_t, std::size_t);
    void (*modwt_step)(const double*, std::size_t, const double*, const double*,
                       std::size_t, std::size_t, double*, double*);
};
extern const Ops scalar_ops;
#if FXVOL_HAVE_AVX2_TU
extern const Ops avx2_ops;
#endif
}  // namespace detail

}  // namespace fxvol::kernels
