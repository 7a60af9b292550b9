#include <cmath>
#include <cstddef>

#include "fxvol/kernels.hpp"

namespace fxvol::kernels::detail {

namespace {

double sum_squares_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double abs_lag_prod_sum_scalar(const double* x, std::size_t n, std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = lag; i < n; ++i) acc += std::fabs(x[i]) * std::fabs(x[i - lag]);
    return acc;
}

void modwt_step_scalar(const double* v, std::size_t n, const double* h,
                       const double* g, std::size_t taps, std::size_t stride,
                       double* w, double* s) {
    const std::size_t step = stride % n;  // stride can exceed n at deep levels
    for (std::size_t t = 0; t < n; ++t) {
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

const Ops scalar_ops = {sum_squares_scalar, dot_scalar, abs_lag_prod_sum_scalar,
                        modwt_step_scalar};

}  // namespace fxvol::kernels::detail
