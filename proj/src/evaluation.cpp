#include "fxvol/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace fxvol::eval {

double one_step_forecast(const model::ParamVector& theta, const model::ModelSpec& spec,
                         double h_t, double x_t, double jv_t, double r_t,
                         double x_floor) {
    if (!(h_t > 0.0)) throw NumericError("one_step_forecast: h_t must be positive");
    if (spec.family == model::Family::garch) {
        return theta.omega + theta.alpha * r_t * r_t + theta.beta * h_t;
    }
    const double lx = std::log(std::max(x_t, x_floor));
    double log_h = theta.omega + theta.beta * std::log(h_t) + theta.gamma * lx;
    if (spec.include_jumps()) log_h += theta.gamma_j * std::log1p(std::max(jv_t, 0.0));
    if (!std::isfinite(log_h) || std::fabs(log_h) > 700.0) {
        throw NumericError("one_step_forecast: overflow in the variance recursion");
    }
    return std::exp(log_h);
}

MzResult mincer_zarnowitz(std::span<const double> targets,
                          std::span<const double> forecasts) {
    const std::size_t n = targets.size();
    if (n != forecasts.size()) throw DataError("mincer_zarnowitz: length mismatch");
    if (n < 3) throw DataError("mincer_zarnowitz: need at least 3 observations");

    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += forecasts[i];
        my += targets[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = forecasts[i] - mx;
        const double dy = targets[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 1e-300)) {
        throw DataError("mincer_zarnowitz: degenerate (constant) forecast series");
    }

    MzResult res;
    res.n = n;
    res.beta = sxy / sxx;
    res.alpha = my - res.beta * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = targets[i] - res.alpha - res.beta * forecasts[i];
        rss += e * e;
    }
    res.r2 = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 0.0;
    if (n > 2) {
        const double s2 = rss / static_cast<double>(n - 2);
        res.se_beta = std::sqrt(s2 / sxx);
        res.se_alpha = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
    }
    return res;
}

Losses loss_metrics(std::span<const double> target_variance,
                    std::span<const double> h_forecasts, double floor) {
    const std::size_t n = target_variance.size();
    if (n != h_forecasts.size()) throw DataError("loss_metrics: length mismatch");
    if (n == 0) throw DataError("loss_metrics: empty series");

    double hmse = 0.0, qlike = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double h = h_forecasts[i];
        if (!(h > 0.0)) throw NumericError("loss_metrics: non-positive forecast");
        const double s2 = std::max(target_variance[i], floor);
        const double ratio = s2 / h;
        hmse += (ratio - 1.0) * (ratio - 1.0);
        qlike += std::log(h) + ratio;
    }
    return Losses{hmse / static_cast<double>(n), qlike / static_cast<double>(n)};
}

double annualize(double iv) {
    if (iv < 0.0) throw NumericError("annualize: negative variance");
    return std::sqrt(252.0 * iv);
}

RollingResult rolling_evaluate(const model::ModelSpec& spec,
                               const model::SeriesData& data,
                               std::span<const double> proxy, Date split,
                               const model::FitOptions& fit_opts,
                               const EvalOptions& opts) {
    const std::size_t T = data.size();
    if (proxy.size() != T) throw DataError("rolling_evaluate: proxy length mismatch");
    std::size_t n_in = 0;
    while (n_in < T && !(data.dates[n_in] > split)) ++n_in;
    if (n_in < opts.min_in_sample) {
        throw DataError("rolling_evaluate: only " + std::to_string(n_in) +
                        " in-sample days, need " + std::to_string(opts.min_in_sample));
    }
    if (T - n_in < opts.min_out_sample) {
        throw DataError("rolling_evaluate: only " + std::to_string(T - n_in) +
                        " out-of-sample days, need " +
                        std::to_string(opts.min_out_sample));
    }

    auto window = [&](std::size_t upto) {
        model::SeriesData w;
        w.dates.assign(data.dates.begin(), data.dates.begin() + upto);
        w.r.assign(data.r.begin(), data.r.begin() + upto);
        if (!data.x.empty()) w.x.assign(data.x.begin(), data.x.begin() + upto);
        if (!data.jv.empty()) w.jv.assign(data.jv.begin(), data.jv.begin() + upto);
        return w;
    };

    RollingResult out;
    out.in_sample_fit = model::fit(spec, window(n_in), fit_opts);
    model::ParamVector theta = out.in_sample_fit.theta;

    const bool refit = opts.scheme == "refit";
    if (opts.scheme != "fixed" && opts.scheme != "refit") {
        throw ConfigError("rolling_evaluate: scheme must be 'fixed' or 'refit'");
    }

    // Filter the whole sample at the current parameters; the state at t is
    // measurable from data up to t, so h[t+1] is a genuine forecast.
    model::FitOptions roll_opts = fit_opts;
    roll_opts.h1_override = out.in_sample_fit.h1;
    auto states = model::filter_states(theta, spec, data, out.in_sample_fit.h1,
                                       fit_opts.x_floor);

    for (std::size_t t = n_in - 1; t + 1 < T; ++t) {
        if (refit && (t + 1 - n_in) > 0 && (t + 1 - n_in) % opts.refit_every == 0) {
            try {
                auto f = model::fit(spec, window(t + 1), roll_opts);
                theta = f.theta;
                states = model::filter_states(theta, spec, data, out.in_sample_fit.h1,
                                              fit_opts.x_floor);
            } catch (const std::exception&) {
                out.refit_gaps = true;  // keep the last good parameters
            }
        }
        const double x_t = spec.has_measurement() ? data.x[t] : 0.0;
        const double jv_t = data.jv.empty() ? 0.0 : data.jv[t];
        const double h_next = one_step_forecast(theta, spec, states.h[t], x_t, jv_t,
                                                data.r[t], fit_opts.x_floor);
        ForecastRecord rec;
        rec.date = data.dates[t + 1];
        rec.h_forecast = h_next;
        rec.vol_forecast = std::sqrt(h_next);
        rec.target_vol = std::sqrt(std::max(proxy[t + 1], 0.0));
        out.records.push_back(rec);
    }
    return out;
}

EvalReport score_forecasts(std::span<const ForecastRecord> records,
                           const std::string& window_label, double floor) {
    if (records.size() < 3) throw DataError("score_forecasts: need >= 3 records");
    std::vector<double> tv, fv, t2, h;
    tv.reserve(records.size());
    for (const auto& r : records) {
        tv.push_back(r.target_vol);
        fv.push_back(r.vol_forecast);
        t2.push_back(r.target_vol * r.target_vol);
        h.push_back(r.h_forecast);
    }
    const auto mz = mincer_zarnowitz(tv, fv);
    const auto loss = loss_metrics(t2, h, floor);
    EvalReport rep;
    rep.alpha_mz = mz.alpha;
    rep.beta_mz = mz.beta;
    rep.r2_mz = mz.r2;
    rep.hmse = loss.hmse;
    rep.qlike = loss.qlike;
    rep.n_obs = records.size();
    rep.window = window_label;
    return rep;
}

}  // namespace fxvol::eval
