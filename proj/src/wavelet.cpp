#include "fxvol/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "fxvol/common.hpp"
#include "fxvol/kernels.hpp"

namespace fxvol::wavelet {

namespace {

// Builds the MODWT pair from DWT scaling coefficients (sum = sqrt 2):
// quadrature mirror h[l] = (-1)^l g[L-1-l], then both rescaled by 1/sqrt(2).
WaveletFilter from_dwt_scaling(std::string name, std::vector<double> g_dwt) {
    const std::size_t L = g_dwt.size();
    WaveletFilter f;
    f.name = std::move(name);
    f.g.resize(L);
    f.h.resize(L);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t l = 0; l < L; ++l) {
        f.g[l] = g_dwt[l] * inv_sqrt2;
        const double sign = (l % 2 == 0) ? 1.0 : -1.0;
        f.h[l] = sign * g_dwt[L - 1 - l] * inv_sqrt2;
    }
    // Step response |sum_{l<=m} h[l]| peaks where a level-1 coefficient
    // reacts most to a jump; that offset is the phase correction.
    double run = 0.0, best = -1.0;
    for (std::size_t m = 0; m < L; ++m) {
        run += f.h[m];
        if (std::fabs(run) > best) {
            best = std::fabs(run);
            f.phase_shift = static_cast<int>(m);
        }
    }
    return f;
}

}  // namespace

WaveletFilter WaveletFilter::haar() {
    const double s = 1.0 / std::sqrt(2.0);
    return from_dwt_scaling("haar", {s, s});
}

WaveletFilter WaveletFilter::d4() {
    const double r3 = std::sqrt(3.0);
    const double den = 4.0 * std::sqrt(2.0);
    return from_dwt_scaling(
        "d4", {(1.0 + r3) / den, (3.0 + r3) / den, (3.0 - r3) / den, (1.0 - r3) / den});
}

WaveletFilter WaveletFilter::la8() {
    // Least-asymmetric 8-tap scaling coefficients (DWT normalization).
    return from_dwt_scaling("la8", {-0.07576571478927333, -0.02963552764599851,
                                    0.49761866763201545, 0.80373875180591614,
                                    0.29785779560527736, -0.09921954357684722,
                                    -0.01260396726203783, 0.03222310060404270});
}

WaveletFilter WaveletFilter::by_name(std::string_view name) {
    if (name == "haar") return haar();
    if (name == "d4") return d4();
    if (name == "la8") return la8();
    throw ConfigError("unknown wavelet filter: '" + std::string(name) + "'");
}

double ModwtPyramid::energy() const {
    double e = kernels::sum_squares(V);
    for (const auto& w : W) e += kernels::sum_squares(w);
    return e;
}

std::vector<double> ModwtPyramid::level_energies() const {
    std::vector<double> e;
    e.reserve(W.size() + 1);
    for (const auto& w : W) e.push_back(kernels::sum_squares(w));
    e.push_back(kernels::sum_squares(V));
    return e;
}

int max_level(std::size_t n, int filter_length) {
    // level j filter width is (2^j - 1)(L - 1) + 1; require it <= n
    int j = 0;
    while (true) {
        const double width =
            (std::pow(2.0, j + 1) - 1.0) * (filter_length - 1) + 1.0;
        if (width > static_cast<double>(n)) break;
        ++j;
        if (j >= 40) break;
    }
    return j;
}

namespace {

ModwtPyramid modwt_impl(std::span<const double> x, const WaveletFilter& f,
                        int levels) {
    const std::size_t n = x.size();
    ModwtPyramid p;
    p.W.resize(levels);
    std::vector<double> v(x.begin(), x.end());
    std::vector<double> v_next(n);
    for (int j = 1; j <= levels; ++j) {
        p.W[j - 1].resize(n);
        const std::size_t stride = std::size_t{1} << (j - 1);
        kernels::modwt_step(v, f.h, f.g, stride, p.W[j - 1], v_next);
        std::swap(v, v_next);
    }
    p.V = std::move(v);
    return p;
}

}  // namespace

ModwtPyramid modwt(std::span<const double> x, const WaveletFilter& f, int levels) {
    if (x.size() < static_cast<std::size_t>(f.length())) {
        throw NumericError("modwt: input shorter than the filter");
    }
    if (levels < 1) throw NumericError("modwt: levels must be >= 1");
    if (levels > max_level(x.size(), f.length())) {
        throw NumericError("modwt: " + std::to_string(levels) +
                           " levels too deep for n=" + std::to_string(x.size()) +
                           " with filter " + f.name);
    }
    return modwt_impl(x, f, levels);
}

ModwtPyramid modwt_unchecked(std::span<const double> x, const WaveletFilter& f,
                             int levels) {
    if (x.empty()) throw NumericError("modwt: empty input");
    return modwt_impl(x, f, levels);
}

double mad_scale(std::span<const double> w1) {
    if (w1.empty()) throw NumericError("mad_scale: empty coefficient vector");
    std::vector<double> a(w1.size());
    for (std::size_t i = 0; i < w1.size(); ++i) a[i] = std::fabs(w1[i]);
    const std::size_t mid = a.size() / 2;
    std::nth_element(a.begin(), a.begin() + mid, a.end());
    double med = a[mid];
    if (a.size() % 2 == 0) {
        const double lo = *std::max_element(a.begin(), a.begin() + mid);
        med = 0.5 * (lo + med);
    }
    return std::sqrt(2.0) * med / 0.6745;
}

JumpDetection detect_jumps(std::span<const double> log_prices,
                           const WaveletFilter& f) {
    const std::size_t n = log_prices.size();
    const int L = f.length();
    if (n < static_cast<std::size_t>(L)) {
        throw NumericError("detect_jumps: series shorter than the filter");
    }

    std::vector<double> w1(n), v1(n);
    kernels::modwt_step(log_prices, f.h, f.g, 1, w1, v1);

    JumpDetection jd;
    jd.d_scale = mad_scale(w1);
    jd.threshold = jd.d_scale * std::sqrt(2.0 * std::log(static_cast<double>(n)));

    // Candidate coefficients: strictly above threshold, outside the circular
    // boundary region [0, L-1).
    std::vector<std::size_t> flagged;
    for (std::size_t t = static_cast<std::size_t>(L - 1); t < n; ++t) {
        if (std::fabs(w1[t]) > jd.threshold) flagged.push_back(t);
    }

    // A single jump in return k excites coefficients t in [k, k+L-2]; resolve
    // each flagged cluster to the dominant return inside that support. With
    // the Haar pair the window is a single point and this reduces to flagging
    // return t directly.
    std::vector<char> open(flagged.size(), 1);
    std::vector<Jump> jumps;
    while (true) {
        int peak = -1;
        double peak_mag = -1.0;
        for (std::size_t i = 0; i < flagged.size(); ++i) {
            if (open[i] && std::fabs(w1[flagged[i]]) > peak_mag) {
                peak_mag = std::fabs(w1[flagged[i]]);
                peak = static_cast<int>(i);
            }
        }
        if (peak < 0) break;
        const std::size_t t = flagged[peak];
        const std::size_t lo = (t >= static_cast<std::size_t>(L - 2))
                                   ? t - static_cast<std::size_t>(L - 2)
                                   : 0;
        std::size_t best_k = 0;
        double best_r = -1.0;
        for (std::size_t k = std::max<std::size_t>(lo, 1); k <= t; ++k) {
            const double r = std::fabs(log_prices[k] - log_prices[k - 1]);
            if (r > best_r) {
                best_r = r;
                best_k = k;
            }
        }
        if (best_k >= 1) {
            bool dup = false;
            for (const auto& jmp : jumps) {
                if (jmp.index == static_cast<int>(best_k)) dup = true;
            }
            if (!dup) {
                jumps.push_back(Jump{static_cast<int>(best_k),
                                     log_prices[best_k] - log_prices[best_k - 1],
                                     peak_mag});
            }
            // retire every coefficient this jump explains
            for (std::size_t i = 0; i < flagged.size(); ++i) {
                if (open[i] && flagged[i] >= best_k &&
                    flagged[i] <= best_k + static_cast<std::size_t>(L - 2)) {
                    open[i] = 0;
                }
            }
        }
        open[peak] = 0;
    }

    std::sort(jumps.begin(), jumps.end(),
              [](const Jump& a, const Jump& b) { return a.index < b.index; });
    jd.jumps = std::move(jumps);
    return jd;
}

std::vector<double> jump_adjust(std::span<const double> log_prices,
                                const JumpDetection& jd) {
    std::vector<double> adj(log_prices.begin(), log_prices.end());
    for (const auto& j : jd.jumps) {
        if (j.index < 1 || static_cast<std::size_t>(j.index) >= adj.size()) {
            throw NumericError("jump_adjust: jump index out of range");
        }
        for (std::size_t m = static_cast<std::size_t>(j.index); m < adj.size(); ++m) {
            adj[m] -= j.size;
        }
    }
    return adj;
}

}  // namespace fxvol::wavelet
