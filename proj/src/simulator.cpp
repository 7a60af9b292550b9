#include "fxvol/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fxvol/rng.hpp"

namespace fxvol::sim {

namespace {
enum Stream : std::uint64_t {
    kDiffusion = 1,
    kJumps = 2,
    kNoise = 3,
    kVolLevel = 4,
};
}

void SimConfig::validate() const {
    if (n_intraday < 2) throw ConfigError("simulator: n_intraday must be >= 2");
    if (days < 1) throw ConfigError("simulator: days must be >= 1");
    if (sigma < 0) throw ConfigError("simulator: sigma must be >= 0");
    if (noise_std < 0) throw ConfigError("simulator: noise_std must be >= 0");
    if (jumps_per_day < 0) throw ConfigError("simulator: jumps_per_day must be >= 0");
    if (jump_std < 0) throw ConfigError("simulator: jump_std must be >= 0");
    if (diurnal_amplitude < 0 || diurnal_amplitude >= 1) {
        throw ConfigError("simulator: diurnal_amplitude must be in [0, 1)");
    }
    if (ou_kappa <= 0) throw ConfigError("simulator: ou_kappa must be > 0");
    if (ou_vol < 0) throw ConfigError("simulator: ou_vol must be >= 0");
    if (noise_t_dof <= 2) throw ConfigError("simulator: noise_t_dof must be > 2");
}

namespace {

// Daily base variance for day `idx`. The OU state is reconstructed by
// iterating the exact one-day transition from day 0, all draws coming from
// a dedicated stream, so the value depends only on (seed, idx).
double day_variance(const SimConfig& cfg, int idx) {
    const double base = cfg.sigma * cfg.sigma;
    if (cfg.vol_model != VolModel::ou_daily || cfg.ou_vol == 0.0) return base;

    rng::Sampler level(rng::make_engine(cfg.seed, kVolLevel));
    const double phi = std::exp(-cfg.ou_kappa);
    const double innov_sd = cfg.ou_vol * std::sqrt(1.0 - phi * phi);
    double state = cfg.ou_vol * level.normal();  // stationary start
    for (int t = 0; t < idx; ++t) state = phi * state + innov_sd * level.normal();
    // log-variance centered so that E[exp(state)] keeps the base level
    return base * std::exp(state - 0.5 * cfg.ou_vol * cfg.ou_vol);
}

}  // namespace

SimulatedDay simulate_day(const SimConfig& cfg, int day_index) {
    cfg.validate();
    const int n = cfg.n_intraday;
    const double dt = 1.0 / n;
    const double var_day = day_variance(cfg, day_index);

    SimulatedDay day;
    day.latent_log_price.resize(n + 1);
    day.observed_log_price.resize(n + 1);

    rng::Sampler diff(rng::make_engine(cfg.seed, kDiffusion, day_index));
    day.latent_log_price[0] = cfg.initial_log_price;
    double iv = 0.0;
    for (int k = 1; k <= n; ++k) {
        double var_k = var_day;
        if (cfg.vol_model == VolModel::diurnal && cfg.diurnal_amplitude > 0.0) {
            const double u = (k - 0.5) / n;
            var_k *= 1.0 + cfg.diurnal_amplitude *
                               std::cos(2.0 * 3.14159265358979323846 * u);
        }
        iv += var_k * dt;
        day.latent_log_price[k] = day.latent_log_price[k - 1] + cfg.mu * dt +
                                  std::sqrt(var_k * dt) * diff.normal();
    }
    day.true_iv = iv;

    if (cfg.jumps_per_day > 0.0) {
        rng::Sampler jmp(rng::make_engine(cfg.seed, kJumps, day_index));
        const int count = jmp.poisson(cfg.jumps_per_day);
        std::map<int, double> placed;  // merge arrivals sharing a grid step
        for (int i = 0; i < count; ++i) {
            const int k = jmp.uniform_int(1, n);
            const double size = jmp.normal(cfg.jump_mean, cfg.jump_std);
            placed[k] += size;
        }
        for (const auto& [k, size] : placed) {
            day.jump_indices.push_back(k);
            day.jump_sizes.push_back(size);
            day.true_jv += size * size;
            for (int m = k; m <= n; ++m) day.latent_log_price[m] += size;
        }
    }

    if (cfg.noise_std > 0.0) {
        rng::Sampler noise(rng::make_engine(cfg.seed, kNoise, day_index));
        for (int k = 0; k <= n; ++k) {
            double eps;
            if (cfg.student_t_noise) {
                const double scale =
                    cfg.noise_std / std::sqrt(cfg.noise_t_dof / (cfg.noise_t_dof - 2.0));
                eps = scale * noise.student_t(cfg.noise_t_dof);
            } else {
                eps = cfg.noise_std * noise.normal();
            }
            day.observed_log_price[k] = day.latent_log_price[k] + eps;
        }
    } else {
        day.observed_log_price = day.latent_log_price;
    }
    return day;
}

}  // namespace fxvol::sim
