#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fxvol::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Independent engine for a (seed, stream, substream) triple. Draw order in
// one stream never affects another, so per-day simulation is reproducible
// regardless of which days get generated.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t substream = 0) {
    std::uint64_t s = seed ^ 0xD6E8FEB86659FD93ull;
    std::uint64_t a = splitmix64(s);
    s ^= stream * 0xA24BAED4963EE407ull;
    std::uint64_t b = splitmix64(s);
    s ^= substream * 0x9FB21C651E98DF25ull;
    std::uint64_t c = splitmix64(s);
    std::seed_seq seq{a, b, c};
    return std::mt19937_64(seq);
}

// Hand-rolled samplers: std::normal_distribution is implementation-defined,
// these are bit-stable across standard libraries.
class Sampler {
  public:
    explicit Sampler(std::mt19937_64 engine) : eng_(engine) {}

    // uniform on (0, 1)
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Inverse-CDF by sequential search; fine for the small intensities used
    // in daily jump counts.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double u = uniform();
        double p = std::exp(-lambda);
        double cdf = p;
        int k = 0;
        while (u > cdf && k < 10000) {
            ++k;
            p *= lambda / k;
            cdf += p;
        }
        return k;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(eng_() % span);
    }

    double student_t(double dof) {
        // ratio of normal to sqrt of chi^2/dof, chi^2 via sum of squares
        const double z = normal();
        double chi2 = 0.0;
        const int k = static_cast<int>(dof);
        for (int i = 0; i < k; ++i) {
            const double g = normal();
            chi2 += g * g;
        }
        return z / std::sqrt(chi2 / dof);
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fxvol::rng
