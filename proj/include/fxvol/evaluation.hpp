#pragma once

#include <span>
#include <string>
#include <vector>

#include "fxvol/common.hpp"
#include "fxvol/models.hpp"

namespace fxvol::eval {

struct ForecastRecord {
    Date date;               // t+1
    double h_forecast = 0.0; // conditional variance forecast made at t
    double vol_forecast = 0.0;
    double target_vol = 0.0; // sqrt of the realized proxy at t+1
};

// Direct one-step recursion; measurable at t. r_t is only used by the plain
// GARCH family.
double one_step_forecast(const model::ParamVector& theta, const model::ModelSpec& spec,
                         double h_t, double x_t, double jv_t, double r_t,
                         double x_floor = 1e-12);

struct MzResult {
    double alpha = 0.0;
    double beta = 0.0;
    double r2 = 0.0;
    double se_alpha = 0.0;
    double se_beta = 0.0;
    std::size_t n = 0;
};

// OLS of realized proxy on forecast, volatility units.
MzResult mincer_zarnowitz(std::span<const double> targets,
                          std::span<const double> forecasts);

struct Losses {
    double hmse = 0.0;
    double qlike = 0.0;
};

// variance units; zero targets are floored before the ratio
Losses loss_metrics(std::span<const double> target_variance,
                    std::span<const double> h_forecasts, double floor = 1e-12);

double annualize(double iv);  // sqrt(252 * iv)

struct EvalOptions {
    std::string scheme = "fixed";  // "fixed" | "refit"
    int refit_every = 20;          // expanding-window cadence for "refit"
    std::size_t min_in_sample = 100;
    std::size_t min_out_sample = 20;
    double target_floor = 1e-12;
};

struct RollingResult {
    std::vector<ForecastRecord> records;
    model::FitResult in_sample_fit;
    bool refit_gaps = false;  // a mid-roll refit failed and was skipped
};

// Fits on [begin, split] and rolls the filter through the rest using the
// realized series as it arrives. proxy supplies the evaluation target
// (variance units); it may alias data.x.
RollingResult rolling_evaluate(const model::ModelSpec& spec,
                               const model::SeriesData& data,
                               std::span<const double> proxy, Date split,
                               const model::FitOptions& fit_opts,
                               const EvalOptions& opts);

struct EvalReport {
    double alpha_mz = 0.0;
    double beta_mz = 0.0;
    double r2_mz = 0.0;
    double hmse = 0.0;
    double qlike = 0.0;
    std::size_t n_obs = 0;
    std::string window;
    bool refit_gaps = false;
};

EvalReport score_forecasts(std::span<const ForecastRecord> records,
                           const std::string& window_label, double floor = 1e-12);

}  // namespace fxvol::eval
