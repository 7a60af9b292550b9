#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fxvol/kernels.hpp"
#include "fxvol/rng.hpp"
#include "fxvol/simulator.hpp"
#include "fxvol/wavelet.hpp"

using namespace fxvol;
using wavelet::WaveletFilter;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    rng::Sampler s(rng::make_engine(seed, 3));
    std::vector<double> v(n);
    for (auto& x : v) x = s.normal();
    return v;
}

}  // namespace

TEST_CASE("filters satisfy the MODWT normalization") {
    for (const char* name : {"haar", "d4", "la8"}) {
        const auto f = WaveletFilter::by_name(name);
        double sh = 0, sg = 0, sh2 = 0, sg2 = 0;
        for (int l = 0; l < f.length(); ++l) {
            sh += f.h[l];
            sg += f.g[l];
            sh2 += f.h[l] * f.h[l];
            sg2 += f.g[l] * f.g[l];
        }
        CAPTURE(name);
        CHECK(sh == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(sg == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sh2 == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(sg2 == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK_THROWS_AS(WaveletFilter::by_name("sym13"), ConfigError);
}

TEST_CASE("phase shifts: haar aligns at 0, d4 at 2") {
    CHECK(WaveletFilter::haar().phase_shift == 0);
    CHECK(WaveletFilter::d4().phase_shift == 2);
}

TEST_CASE("constant input maps entirely to the scaling band") {
    for (const char* name : {"haar", "d4", "la8"}) {
        const auto f = WaveletFilter::by_name(name);
        const std::vector<double> x(200, 1.5);
        const auto p = wavelet::modwt(x, f, 3);
        for (const auto& w : p.W) {
            for (double c : w) CHECK(std::fabs(c) < 1e-10);
        }
        for (double v : p.V) CHECK(v == doctest::Approx(1.5).epsilon(1e-10));
    }
}

TEST_CASE("energy conservation against the direct-summation oracle") {
    for (const char* name : {"haar", "d4", "la8"}) {
        const auto f = WaveletFilter::by_name(name);
        for (std::size_t n : {277u, 512u, 1024u}) {
            const auto x = random_vec(n, 900 + n);
            const int levels = std::min(5, wavelet::max_level(n, f.length()));
            const auto p = wavelet::modwt(x, f, levels);
            // oracle: plain summation of squares, no kernel involvement
            double in_energy = 0;
            for (double v : x) in_energy += v * v;
            double out_energy = 0;
            for (const auto& w : p.W) {
                for (double c : w) out_energy += c * c;
            }
            for (double v : p.V) out_energy += v * v;
            CAPTURE(name);
            CAPTURE(n);
            CHECK(std::fabs(out_energy - in_energy) / in_energy < 1e-9);
        }
    }
}

TEST_CASE("unit impulse under haar level 1") {
    std::vector<double> x(64, 0.0);
    x[10] = 1.0;
    const auto p = wavelet::modwt(x, WaveletFilter::haar(), 1);
    int nonzero = 0;
    for (double c : p.W[0]) {
        if (std::fabs(c) > 1e-15) {
            ++nonzero;
            CHECK(std::fabs(c) == doctest::Approx(0.5));
        }
    }
    CHECK(nonzero == 2);
}

TEST_CASE("level-depth guard") {
    const auto f = WaveletFilter::d4();
    const std::vector<double> x = random_vec(32, 5);
    CHECK_THROWS_AS(wavelet::modwt(x, f, 12), NumericError);
    CHECK_NOTHROW(wavelet::modwt_unchecked(x, f, 12));
    // the unchecked transform still conserves energy
    const auto p = wavelet::modwt_unchecked(x, f, 12);
    double e_in = 0, e_out = kernels::sum_squares(p.V);
    for (double v : x) e_in += v * v;
    for (const auto& w : p.W) e_out += kernels::sum_squares(w);
    CHECK(std::fabs(e_out - e_in) / e_in < 1e-9);
}

TEST_CASE("mad_scale closed forms") {
    std::vector<double> w(101, 0.25);
    CHECK(wavelet::mad_scale(w) == doctest::Approx(std::sqrt(2.0) * 0.25 / 0.6745));

    // robustness: one enormous outlier barely moves the estimate
    auto base = random_vec(4001, 17);
    const double d0 = wavelet::mad_scale(base);
    base[5] = 1e6;
    const double d1 = wavelet::mad_scale(base);
    CHECK(std::fabs(d1 - d0) / d0 < 0.01);
}

TEST_CASE("mad_scale recovers the scale of gaussian coefficients") {
    // |N(0,s)| has median 0.6745 s, so d = sqrt(2) * s within MC error
    rng::Sampler smp(rng::make_engine(99, 1));
    const double s = 0.37;
    std::vector<double> w(100000);
    for (auto& v : w) v = s * smp.normal();
    const double d = wavelet::mad_scale(w);
    CHECK(d / s == doctest::Approx(std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("constant price path has no jumps") {
    const std::vector<double> y(300, 1.5);
    const auto jd = wavelet::detect_jumps(y, WaveletFilter::haar());
    CHECK(jd.jumps.empty());
}

TEST_CASE("jump detection flags an injected step and sizes it") {
    // diffusion path with one large step; haar detection is exact per index
    sim::SimConfig cfg;
    cfg.n_intraday = 276;
    cfg.sigma = 0.01;
    cfg.seed = 4242;
    int correct_index = 0;
    double size_ratio_sum = 0.0;
    const int days = 400;
    const double per_step = cfg.sigma / std::sqrt(276.0);
    for (int d = 0; d < days; ++d) {
        auto day = sim::simulate_day(cfg, d);
        auto y = day.observed_log_price;
        const int k = 30 + (d % 200);
        const double jump = 8.0 * per_step * ((d % 2) ? 1.0 : -1.0);
        for (std::size_t m = k; m < y.size(); ++m) y[m] += jump;
        const auto jd = wavelet::detect_jumps(y, WaveletFilter::haar());
        for (const auto& j : jd.jumps) {
            if (j.index == k) {
                ++correct_index;
                size_ratio_sum += j.size / jump;
            }
        }
    }
    CHECK(static_cast<double>(correct_index) / days > 0.95);
    CHECK(size_ratio_sum / correct_index == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("d4 detection localizes through the cluster resolution") {
    sim::SimConfig cfg;
    cfg.n_intraday = 276;
    cfg.sigma = 0.01;
    cfg.seed = 777;
    const double per_step = cfg.sigma / std::sqrt(276.0);
    int correct = 0;
    const int days = 300;
    for (int d = 0; d < days; ++d) {
        auto day = sim::simulate_day(cfg, d);
        auto y = day.observed_log_price;
        const int k = 40 + (d % 180);
        for (std::size_t m = k; m < y.size(); ++m) y[m] += 10.0 * per_step;
        const auto jd = wavelet::detect_jumps(y, WaveletFilter::d4());
        for (const auto& j : jd.jumps) {
            if (j.index == k) ++correct;
        }
    }
    CHECK(static_cast<double>(correct) / days > 0.9);
}

TEST_CASE("false flags on pure diffusion stay rare") {
    sim::SimConfig cfg;
    cfg.n_intraday = 276;
    cfg.sigma = 0.01;
    cfg.seed = 31;
    std::size_t flags = 0;
    const int days = 500;
    for (int d = 0; d < days; ++d) {
        const auto day = sim::simulate_day(cfg, d);
        flags += wavelet::detect_jumps(day.observed_log_price, WaveletFilter::haar())
                     .jumps.size();
    }
    CHECK(static_cast<double>(flags) / days <= 1.0);
}

TEST_CASE("flag set is invariant under price scaling") {
    sim::SimConfig cfg;
    cfg.n_intraday = 276;
    cfg.sigma = 0.01;
    cfg.seed = 55;
    for (int d = 0; d < 20; ++d) {
        auto day = sim::simulate_day(cfg, d);
        auto y = day.observed_log_price;
        const int k = 100;
        for (std::size_t m = k; m < y.size(); ++m) y[m] += 0.004;
        auto scaled = y;
        for (auto& v : scaled) v *= 4.0;  // power of two: exact in binary
        const auto a = wavelet::detect_jumps(y, WaveletFilter::haar());
        const auto b = wavelet::detect_jumps(scaled, WaveletFilter::haar());
        REQUIRE(a.jumps.size() == b.jumps.size());
        for (std::size_t i = 0; i < a.jumps.size(); ++i) {
            CHECK(a.jumps[i].index == b.jumps[i].index);
        }
    }
}

TEST_CASE("jump_adjust removes flagged returns and only those") {
    std::vector<double> y = {0.0, 0.01, 0.02, 0.09, 0.10, 0.11};
    wavelet::JumpDetection jd;
    jd.jumps.push_back(wavelet::Jump{3, 0.07, 1.0});
    const auto adj = wavelet::jump_adjust(y, jd);
    CHECK(adj[0] == doctest::Approx(0.0));
    CHECK(adj[2] == doctest::Approx(0.02));
    CHECK(adj[3] == doctest::Approx(0.02));  // return 3 now zero
    CHECK(adj[4] == doctest::Approx(0.03));  // later returns unchanged
    CHECK(adj[5] == doctest::Approx(0.04));

    // no jumps: identity
    const auto same = wavelet::jump_adjust(y, wavelet::JumpDetection{});
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(same[i] == y[i]);
}

TEST_CASE("adjusted return sum identity") {
    auto y = random_vec(200, 71);
    std::partial_sum(y.begin(), y.end(), y.begin());
    for (auto& v : y) v *= 0.001;
    const auto jd = wavelet::detect_jumps(y, WaveletFilter::haar());
    const auto adj = wavelet::jump_adjust(y, jd);
    double jump_sum = 0;
    for (const auto& j : jd.jumps) jump_sum += j.size;
    const double before = y.back() - y.front();
    const double after = adj.back() - adj.front();
    CHECK(after == doctest::Approx(before - jump_sum).epsilon(1e-12));
}

TEST_CASE("re-detection after adjustment is quiet at the same indices") {
    sim::SimConfig cfg;
    cfg.n_intraday = 276;
    cfg.sigma = 0.01;
    cfg.seed = 20;
    const double per_step = cfg.sigma / std::sqrt(276.0);
    int re_flagged = 0, detected_days = 0;
    for (int d = 0; d < 200; ++d) {
        auto day = sim::simulate_day(cfg, d);
        auto y = day.observed_log_price;
        const int k = 50 + (d % 150);
        for (std::size_t m = k; m < y.size(); ++m) y[m] += 8.0 * per_step;
        const auto jd = wavelet::detect_jumps(y, WaveletFilter::haar());
        bool hit = false;
        for (const auto& j : jd.jumps) hit |= (j.index == k);
        if (!hit) continue;
        ++detected_days;
        const auto adj = wavelet::jump_adjust(y, jd);
        const auto jd2 = wavelet::detect_jumps(adj, WaveletFilter::haar());
        for (const auto& j : jd2.jumps) {
            if (j.index == k) ++re_flagged;
        }
    }
    REQUIRE(detected_days > 150);
    CHECK(static_cast<double>(re_flagged) / detected_days < 0.01);
}

TEST_CASE("jump-adjusted RV approaches the diffusion variance") {
    sim::SimConfig cfg;
    cfg.n_intraday = 276;
    cfg.sigma = 0.01;
    cfg.seed = 321;
    cfg.jumps_per_day = 1.0;
    cfg.jump_mean = 0.0;
    cfg.jump_std = 8.0 * cfg.sigma / std::sqrt(276.0);
    double ratio_sum = 0;
    const int days = 500;
    for (int d = 0; d < days; ++d) {
        const auto day = sim::simulate_day(cfg, d);
        const auto jd =
            wavelet::detect_jumps(day.observed_log_price, WaveletFilter::haar());
        const auto adj = wavelet::jump_adjust(day.observed_log_price, jd);
        double rv = 0;
        for (std::size_t k = 1; k < adj.size(); ++k) {
            const double r = adj[k] - adj[k - 1];
            rv += r * r;
        }
        ratio_sum += rv / day.true_iv;
    }
    CHECK(ratio_sum / days == doctest::Approx(1.0).epsilon(0.05));
}
