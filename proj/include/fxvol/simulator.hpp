#pragma once

#include <cstdint>
#include <vector>

#include "fxvol/common.hpp"

namespace fxvol::sim {

enum class VolModel { constant, diurnal, ou_daily };

// Intraday jump diffusion observed under additive i.i.d. noise. Each day is
// a pure function of (seed, day_index): per-day RNG streams are derived, so
// days can be generated in any order with identical output.
struct SimConfig {
    int n_intraday = 276;  // observations per day (returns)
    int days = 1;
    double mu = 0.0;       // drift per day (in log-price units)
    VolModel vol_model = VolModel::constant;
    double sigma = 0.01;   // sqrt of daily integrated variance at base level
    double diurnal_amplitude = 0.0;  // sigma^2 modulation, in [0, 1)
    // Daily-step mean-reverting log-variance: the state follows an exact
    // OU transition at one-day resolution and is constant within the day.
    double ou_kappa = 3.0;       // mean-reversion speed per day
    double ou_vol = 0.0;         // stationary std of log-variance
    double noise_std = 0.0;      // eta
    bool student_t_noise = false;
    double noise_t_dof = 5.0;
    double jumps_per_day = 0.0;  // Poisson intensity
    double jump_mean = 0.0;
    double jump_std = 0.0;
    double initial_log_price = 0.0;
    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigError
};

struct SimulatedDay {
    std::vector<double> observed_log_price;  // N+1 values, y = p + noise
    std::vector<double> latent_log_price;    // N+1 values
    double true_iv = 0.0;                    // sum of sigma_k^2 * dt
    double true_jv = 0.0;                    // sum of squared placed jumps
    std::vector<int> jump_indices;           // return index, 1-based
    std::vector<double> jump_sizes;
};

SimulatedDay simulate_day(const SimConfig& cfg, int day_index);

}  // namespace fxvol::sim
