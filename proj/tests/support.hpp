#pragma once

// Shared test fixtures: a direct simulator for the log-linear recursion used
// as the independent oracle for filtering, likelihoods, fitting, and
// forecasting tests.

#include <cmath>
#include <vector>

#include "fxvol/models.hpp"
#include "fxvol/rng.hpp"

namespace testsup {

struct RgSimOutput {
    fxvol::model::SeriesData data;
    std::vector<double> h;  // the conditional variance the recursion produced
};

// Simulates r_t = sqrt(h_t) z_t with the log-linear variance recursion and
// measurement equation at fixed parameters. jv_intensity > 0 adds an
// exogenous positive jump-variation series fed through gamma_j.
inline RgSimOutput simulate_realized_garch(const fxvol::model::ParamVector& th,
                                           std::size_t T, std::uint64_t seed,
                                           bool with_jumps = false,
                                           double jv_intensity = 0.3) {
    using fxvol::Date;
    fxvol::rng::Sampler smp(fxvol::rng::make_engine(seed, 21));
    RgSimOutput out;
    auto& d = out.data;
    d.dates.reserve(T);
    d.r.reserve(T);
    d.x.reserve(T);
    d.jv.assign(T, 0.0);
    if (with_jumps) {
        for (std::size_t t = 0; t < T; ++t) {
            if (smp.uniform() < jv_intensity) {
                const double s = 0.5 * smp.normal();
                d.jv[t] = s * s;
            }
        }
    }

    // start the recursion at its unconditional mean
    const double denom = 1.0 - th.beta - th.gamma * th.psi;
    double log_h = (th.omega + th.gamma * th.xi_m + th.gamma * th.tau2) /
                   (denom != 0.0 ? denom : 1.0);
    Date day{2015, 1, 1};
    double prev_lx = 0.0, prev_jv = 0.0;
    out.h.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        if (t > 0) {
            log_h = th.omega + th.beta * log_h + th.gamma * prev_lx +
                    (with_jumps ? th.gamma_j * std::log1p(prev_jv) : 0.0);
        }
        const double h = std::exp(log_h);
        out.h.push_back(h);
        const double z = smp.normal();
        const double u = th.sigma_u * smp.normal();
        const double lx = th.xi_m + th.psi * log_h + th.tau1 * z + th.tau2 * z * z + u;
        d.dates.push_back(day);
        d.r.push_back(std::sqrt(h) * z);
        d.x.push_back(std::exp(lx));
        prev_lx = lx;
        prev_jv = d.jv[t];
        day = day.next_day();
    }
    return out;
}

inline fxvol::model::ParamVector reference_theta() {
    fxvol::model::ParamVector th;
    th.omega = 0.15;
    th.beta = 0.55;
    th.gamma = 0.30;
    th.xi_m = -0.4;
    th.psi = 1.2;
    th.sigma_u = 0.30;
    th.tau1 = -0.04;
    th.tau2 = 0.07;
    return th;
}

}  // namespace testsup
