#include <doctest.h>

#include <cmath>

#include "fxvol/evaluation.hpp"
#include "fxvol/rng.hpp"
#include "support.hpp"

using namespace fxvol;
using namespace fxvol::eval;

TEST_CASE("one_step_forecast closed forms") {
    model::ModelSpec rg{model::Family::realized_garch};
    model::ParamVector th;
    th.omega = 0;
    th.beta = 1;
    th.gamma = 0;
    CHECK(one_step_forecast(th, rg, 1.7, 1e-4, 0, 0) == doctest::Approx(1.7));

    // jump term vanishes at jv = 0
    model::ModelSpec rjg{model::Family::realized_jgarch};
    model::ParamVector tj = testsup::reference_theta();
    tj.gamma_j = 0.4;
    const double a = one_step_forecast(tj, rg, 1.3, 2e-4, 0.0, 0.0);
    const double b = one_step_forecast(tj, rjg, 1.3, 2e-4, 0.0, 0.0);
    CHECK(a == doctest::Approx(b).epsilon(1e-14));

    model::ModelSpec g{model::Family::garch};
    model::ParamVector tg;
    tg.omega = 0.1;
    tg.alpha = 0.2;
    tg.beta = 0.5;
    CHECK(one_step_forecast(tg, g, 2.0, 0, 0, 3.0) ==
          doctest::Approx(0.1 + 0.2 * 9.0 + 0.5 * 2.0));
    CHECK_THROWS_AS(one_step_forecast(tg, g, -1.0, 0, 0, 0), NumericError);
}

TEST_CASE("forecast recursion is the simulator recursion at true theta") {
    const auto th = testsup::reference_theta();
    const auto sim = testsup::simulate_realized_garch(th, 300, 13);
    model::ModelSpec spec{model::Family::realized_garch};
    const auto st = model::filter_states(th, spec, sim.data, sim.h[0]);
    for (std::size_t t = 0; t + 1 < sim.data.size(); ++t) {
        const double f =
            one_step_forecast(th, spec, st.h[t], sim.data.x[t], 0.0, sim.data.r[t]);
        CHECK(f == doctest::Approx(sim.h[t + 1]).epsilon(1e-9));
    }
}

TEST_CASE("mincer_zarnowitz closed forms") {
    std::vector<double> f = {1.0, 2.0, 3.0, 4.0, 5.0};
    const auto ident = mincer_zarnowitz(f, f);
    CHECK(ident.alpha == doctest::Approx(0.0));
    CHECK(ident.beta == doctest::Approx(1.0));
    CHECK(ident.r2 == doctest::Approx(1.0));

    std::vector<double> t(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) t[i] = 2.0 * f[i] + 1.0;
    const auto affine = mincer_zarnowitz(t, f);
    CHECK(affine.alpha == doctest::Approx(1.0));
    CHECK(affine.beta == doctest::Approx(2.0));
    CHECK(affine.r2 == doctest::Approx(1.0));

    CHECK_THROWS_AS(mincer_zarnowitz(t, std::vector<double>(5, 1.0)), DataError);
    CHECK_THROWS_AS(
        mincer_zarnowitz(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
        DataError);
}

TEST_CASE("MZ affine invariance of slope and R2") {
    rng::Sampler smp(rng::make_engine(4, 4));
    std::vector<double> f(300), t(300);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = 1.0 + 0.3 * smp.normal();
        t[i] = 0.2 + 0.9 * f[i] + 0.2 * smp.normal();
    }
    const auto base = mincer_zarnowitz(t, f);
    std::vector<double> g(f.size());
    const double a = 0.7, b = 2.5;
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = a + b * f[i];
    const auto mapped = mincer_zarnowitz(t, g);
    CHECK(mapped.beta == doctest::Approx(base.beta / b).epsilon(1e-10));
    CHECK(mapped.r2 == doctest::Approx(base.r2).epsilon(1e-10));
}

TEST_CASE("loss metrics closed forms and scaling") {
    std::vector<double> s2(10, 1.0), h(10, 2.0);
    const auto l = loss_metrics(s2, h);
    CHECK(l.hmse == doctest::Approx(0.25));
    CHECK(l.qlike == doctest::Approx(std::log(2.0) + 0.5));

    // exact forecast: zero HMSE, qlike = mean(log h) + 1
    std::vector<double> hx = {0.5, 1.0, 2.0, 4.0};
    const auto exact = loss_metrics(hx, hx);
    CHECK(exact.hmse == doctest::Approx(0.0));
    double mean_log = 0;
    for (double v : hx) mean_log += std::log(v);
    CHECK(exact.qlike == doctest::Approx(mean_log / 4.0 + 1.0));

    // common rescaling: HMSE invariant, QLIKE shifts by log c
    rng::Sampler smp(rng::make_engine(6, 6));
    std::vector<double> s(50), f(50);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = std::exp(0.3 * smp.normal());
        f[i] = std::exp(0.3 * smp.normal());
    }
    const auto l0 = loss_metrics(s, f);
    const double c = 37.0;
    std::vector<double> sc = s, fc = f;
    for (auto& v : sc) v *= c;
    for (auto& v : fc) v *= c;
    const auto l1 = loss_metrics(sc, fc);
    CHECK(l1.hmse == doctest::Approx(l0.hmse).epsilon(1e-12));
    CHECK(l1.qlike == doctest::Approx(l0.qlike + std::log(c)).epsilon(1e-10));

    CHECK_THROWS_AS(loss_metrics(s2, std::vector<double>(10, 0.0)), NumericError);
}

TEST_CASE("constant QLIKE-optimal forecast is the mean, by grid search") {
    rng::Sampler smp(rng::make_engine(8, 8));
    std::vector<double> s2(200);
    double mean = 0;
    for (auto& v : s2) {
        v = std::exp(0.5 * smp.normal());
        mean += v;
    }
    mean /= static_cast<double>(s2.size());

    double best_h = 0, best_q = 1e300;
    for (double h = 0.2 * mean; h <= 3.0 * mean; h += 0.01 * mean) {
        const auto l = loss_metrics(s2, std::vector<double>(s2.size(), h));
        if (l.qlike < best_q) {
            best_q = l.qlike;
            best_h = h;
        }
    }
    CHECK(best_h == doctest::Approx(mean).epsilon(0.02));
}

TEST_CASE("annualize") {
    CHECK(annualize(0.0) == 0.0);
    CHECK(annualize(1.0 / 252.0) == doctest::Approx(1.0));
    CHECK(annualize(1e-4) == doctest::Approx(0.15874507866).epsilon(1e-9));
    CHECK_THROWS_AS(annualize(-1e-9), NumericError);
}

TEST_CASE("rolling_evaluate fixed scheme produces one record per day") {
    auto th = testsup::reference_theta();
    th.xi_m = 0.0;
    th.psi = 1.0;
    const auto sim = testsup::simulate_realized_garch(th, 220, 44);
    model::ModelSpec spec{model::Family::realized_garch};
    model::FitOptions fopts;
    fopts.min_observations = 100;
    EvalOptions eopts;
    eopts.min_out_sample = 20;
    const Date split = sim.data.dates[199];
    const auto out = rolling_evaluate(spec, sim.data, sim.data.x, split, fopts, eopts);
    CHECK(out.records.size() == 20);
    for (const auto& rec : out.records) {
        CHECK(rec.h_forecast > 0);
        CHECK(rec.vol_forecast == doctest::Approx(std::sqrt(rec.h_forecast)));
    }
    CHECK(!out.refit_gaps);

    // too little data on either side of the split
    CHECK_THROWS_AS(rolling_evaluate(spec, sim.data, sim.data.x,
                                     sim.data.dates[50], fopts, eopts),
                    DataError);
    CHECK_THROWS_AS(rolling_evaluate(spec, sim.data, sim.data.x,
                                     sim.data.dates[210], fopts, eopts),
                    DataError);
}

TEST_CASE("fixed-params forecasts match in-sample filtering inside the window") {
    const auto th = testsup::reference_theta();
    const auto sim = testsup::simulate_realized_garch(th, 400, 70);
    model::ModelSpec spec{model::Family::realized_garch};
    model::FitOptions fopts;

    // treat the last 100 in-window days as "out of sample"
    EvalOptions eopts;
    const auto roll = rolling_evaluate(spec, sim.data, sim.data.x,
                                       sim.data.dates[299], fopts, eopts);
    const auto full_fit = model::fit(spec, sim.data, fopts);

    // refit on the window ending at the split, then filter the whole sample
    model::SeriesData window;
    window.dates.assign(sim.data.dates.begin(), sim.data.dates.begin() + 300);
    window.r.assign(sim.data.r.begin(), sim.data.r.begin() + 300);
    window.x.assign(sim.data.x.begin(), sim.data.x.begin() + 300);
    const auto wfit = model::fit(spec, window, fopts);
    const auto states =
        model::filter_states(wfit.theta, spec, sim.data, wfit.h1);
    for (std::size_t i = 0; i < roll.records.size(); ++i) {
        CHECK(roll.records[i].h_forecast ==
              doctest::Approx(states.h[300 + i]).epsilon(1e-9));
    }
    (void)full_fit;
}

TEST_CASE("true-theta rolling forecasts calibrate the MZ regression") {
    auto th = testsup::reference_theta();
    th.xi_m = 0.0;
    th.psi = 1.0;
    th.tau2 = 0.03;
    const auto sim = testsup::simulate_realized_garch(th, 700, 909);
    model::ModelSpec spec{model::Family::realized_garch};
    const auto st = model::filter_states(th, spec, sim.data, sim.h[0]);
    std::vector<ForecastRecord> recs;
    for (std::size_t t = 199; t + 1 < sim.data.size(); ++t) {
        ForecastRecord rec;
        rec.date = sim.data.dates[t + 1];
        rec.h_forecast =
            one_step_forecast(th, spec, st.h[t], sim.data.x[t], 0, sim.data.r[t]);
        rec.vol_forecast = std::sqrt(rec.h_forecast);
        rec.target_vol = std::sqrt(sim.data.x[t + 1]);
        recs.push_back(rec);
    }
    const auto rep = score_forecasts(recs, "in-test");
    CHECK(rep.beta_mz == doctest::Approx(1.0).epsilon(0.1));
    CHECK(rep.r2_mz > 0.2);
    CHECK(rep.n_obs == recs.size());
}

TEST_CASE("refit scheme runs and flags nothing on clean data") {
    const auto th = testsup::reference_theta();
    const auto sim = testsup::simulate_realized_garch(th, 260, 321);
    model::ModelSpec spec{model::Family::realized_garch};
    model::FitOptions fopts;
    EvalOptions eopts;
    eopts.scheme = "refit";
    eopts.refit_every = 10;
    const auto out = rolling_evaluate(spec, sim.data, sim.data.x,
                                      sim.data.dates[199], fopts, eopts);
    CHECK(out.records.size() == 60);
    CHECK(!out.refit_gaps);

    EvalOptions badscheme;
    badscheme.scheme = "sometimes";
    CHECK_THROWS_AS(rolling_evaluate(spec, sim.data, sim.data.x,
                                     sim.data.dates[199], fopts, badscheme),
                    ConfigError);
}
