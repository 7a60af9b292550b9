#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "fxvol/kernels.hpp"

namespace fxvol::kernels {

namespace {

bool cpu_has_avx2() {
#if FXVOL_HAVE_AVX2_TU && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect_default() {
    if (const char* env = std::getenv("FXVOL_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::avx2;
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

Backend& current() {
    static Backend b = detect_default();
    return b;
}

const detail::Ops& ops_for(Backend b) {
#if FXVOL_HAVE_AVX2_TU
    if (b == Backend::avx2) return detail::avx2_ops;
#endif
    (void)b;
    return detail::scalar_ops;
}

const detail::Ops& ops() { return ops_for(current()); }

}  // namespace

Backend active_backend() { return current(); }

bool backend_available(Backend b) {
    if (b == Backend::scalar) return true;
    return cpu_has_avx2();
}

const char* backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
    if (!backend_available(b)) {
        throw std::invalid_argument("kernel backend not available on this host");
    }
    current() = b;
}

void reset_backend() { current() = detect_default(); }

double sum_squares(std::span<const double> x) {
    return ops().sum_squares(x.data(), x.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
    return ops().dot(a.data(), b.data(), a.size());
}

double abs_lag_prod_sum(std::span<const double> x, std::size_t lag) {
    if (lag >= x.size()) return 0.0;
    return ops().abs_lag_prod_sum(x.data(), x.size(), lag);
}

void modwt_step(std::span<const double> v, std::span<const double> h,
                std::span<const double> g, std::size_t stride,
                std::span<double> w, std::span<double> s) {
    ops().modwt_step(v.data(), v.size(), h.data(), g.data(), h.size(), stride,
                     w.data(), s.data());
}

}  // namespace fxvol::kernels
