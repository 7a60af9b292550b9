#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fxvol::wavelet {

// Filter pair stored in MODWT normalization:
//   sum g = 1, sum h = 0, sum h^2 = sum g^2 = 1/2.
struct WaveletFilter {
    std::string name;
    std::vector<double> h;  // wavelet (high-pass)
    std::vector<double> g;  // scaling (low-pass)
    // Level-1 coefficient offset that aligns a step in the input with the
    // peak-magnitude coefficient: argmax_m |sum_{l<=m} h[l]|.
    int phase_shift = 0;

    int length() const { return static_cast<int>(h.size()); }

    static WaveletFilter haar();
    static WaveletFilter d4();
    static WaveletFilter la8();
    static WaveletFilter by_name(std::string_view name);
};

struct ModwtPyramid {
    std::vector<std::vector<double>> W;  // one vector of length n per level
    std::vector<double> V;               // scaling coefficients, deepest level

    int levels() const { return static_cast<int>(W.size()); }
    std::size_t n() const { return V.size(); }
    double energy() const;
    // Wavelet energy per level followed by the scaling energy (levels+1 values).
    std::vector<double> level_energies() const;
};

// Deepest level such that the level filter is no wider than the data.
int max_level(std::size_t n, int filter_length);

// Pyramid recursion with circular boundary. Throws NumericError when
// levels exceeds max_level(n, L).
ModwtPyramid modwt(std::span<const double> x, const WaveletFilter& f, int levels);

// Same recursion without the depth guard; circular wrap at any depth is
// well defined and keeps the energy identity. Used on sparse subgrids whose
// length can be smaller than the deep-level filter width.
ModwtPyramid modwt_unchecked(std::span<const double> x, const WaveletFilter& f,
                             int levels);

// sqrt(2) * median(|w1|) / 0.6745
double mad_scale(std::span<const double> w1);

struct Jump {
    int index;     // return index k, 1-based over the price grid
    double size;   // the flagged return y[k] - y[k-1]
    double coeff;  // peak |W1| that triggered the flag
};

struct JumpDetection {
    double d_scale = 0.0;
    double threshold = 0.0;
    std::vector<Jump> jumps;  // sorted by index
};

// Universal-threshold flagging on level-1 coefficients of the log-price
// path. Boundary-affected coefficients (first L-1 positions) are never
// flagged but do enter the MAD scale.
JumpDetection detect_jumps(std::span<const double> log_prices,
                           const WaveletFilter& f);

// Subtracts each flagged return from all subsequent price levels, so the
// adjusted return at a flagged index is zero and every other return is
// unchanged.
std::vector<double> jump_adjust(std::span<const double> log_prices,
                                const JumpDetection& jd);

}  // namespace fxvol::wavelet
