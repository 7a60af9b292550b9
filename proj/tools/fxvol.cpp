// fxvol — daily FX volatility measurement and forecasting from intraday data.
//
// Subcommands: simulate, ingest, estimate, jumps, fit, evaluate, run.
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric/convergence error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fxvol/csv.hpp"
#include "fxvol/pipeline.hpp"

namespace fs = std::filesystem;
using namespace fxvol;

namespace {

std::string slurp(const fs::path& p, const char* what) {
    std::ifstream in(p);
    if (!in) throw DataError(std::string("cannot open ") + what + ": " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<market::TradingSession> load_sessions(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open sessions CSV: " + p.string());
    return market::read_sessions_csv(in);
}

void load_returns(const fs::path& p, std::vector<Date>& dates,
                  std::vector<double>& returns) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open returns CSV: " + p.string());
    auto t = csv::read_table(in, "returns CSV");
    const int cd = t.require_column("date");
    const int cr = t.require_column("return");
    for (const auto& row : t.rows) {
        dates.push_back(Date::parse(row[cd]));
        returns.push_back(csv::parse_double(row[cr]));
    }
}

est::MeasureTable load_measures(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open measures CSV: " + p.string());
    return est::read_measures_csv(in);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"High-frequency FX volatility: realized measures, wavelet jump "
                 "detection, Realized GARCH forecasting"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("fxvol ") + kVersion);

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Generate synthetic sessions with known variance and jumps");
    std::string sim_config;
    std::string sim_out = "simulated";
    std::uint64_t sim_seed = 0;
    bool sim_seed_set = false;
    sim_cmd->add_option("--config", sim_config, "pipeline config JSON");
    sim_cmd->add_option("--out", sim_out, "output directory");
    sim_cmd->add_option("--seed", sim_seed, "seed override")
        ->each([&](const std::string&) { sim_seed_set = true; });

    // ---- ingest ----
    auto* ing_cmd = app.add_subcommand("ingest", "Parse ticks into session grids");
    std::string ing_ticks, ing_config;
    std::string ing_out = "sessions";
    int ing_interval = 5;
    ing_cmd->add_option("--ticks", ing_ticks, "tick CSV (timestamp_ms,price)")
        ->required();
    ing_cmd->add_option("--config", ing_config, "pipeline config JSON (calendar)");
    ing_cmd->add_option("--interval-min", ing_interval, "grid interval, minutes");
    ing_cmd->add_option("--out", ing_out, "output directory");

    // ---- estimate ----
    auto* est_cmd =
        app.add_subcommand("estimate", "Compute daily realized measures");
    std::string est_sessions, est_config;
    std::string est_out = "measures.csv";
    bool est_annualize = false;
    est_cmd->add_option("--sessions", est_sessions, "sessions CSV")->required();
    est_cmd->add_option("--config", est_config, "pipeline config JSON (estimator)");
    est_cmd->add_option("--out", est_out, "output CSV");
    est_cmd->add_flag("--annualize", est_annualize,
                      "report sqrt(252 x) instead of daily variance");

    // ---- jumps ----
    auto* jmp_cmd = app.add_subcommand("jumps", "Flag intraday jumps per day");
    std::string jmp_sessions, jmp_config;
    std::string jmp_out = "jumps.csv";
    jmp_cmd->add_option("--sessions", jmp_sessions, "sessions CSV")->required();
    jmp_cmd->add_option("--config", jmp_config, "pipeline config JSON (estimator)");
    jmp_cmd->add_option("--out", jmp_out, "output CSV");

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "Fit a volatility model by QMLE");
    std::string fit_returns, fit_measures, fit_model = "realized_garch";
    std::string fit_measure = "jwtsrv";
    std::string fit_out = "fit.json", fit_states;
    int fit_scale = 0;
    bool fit_jumps = false;
    std::size_t fit_min_obs = 100;
    fit_cmd->add_option("--returns", fit_returns, "returns CSV (date,return)")
        ->required();
    fit_cmd->add_option("--measures", fit_measures, "measures CSV");
    fit_cmd->add_option("--model", fit_model,
                        "garch | realized_garch | realized_jgarch | "
                        "realized_jgarch_scale");
    fit_cmd->add_option("--measure", fit_measure, "measures column feeding x_t");
    fit_cmd->add_option("--scale", fit_scale, "component index for the scale model");
    fit_cmd->add_flag("--jumps", fit_jumps, "include the log(1+JV) term");
    fit_cmd->add_option("--min-obs", fit_min_obs, "minimum observations");
    fit_cmd->add_option("--out", fit_out, "fit artifact JSON");
    fit_cmd->add_option("--states", fit_states, "filtered-state CSV (date,h,z,u)");

    // ---- evaluate ----
    auto* ev_cmd = app.add_subcommand(
        "evaluate", "Rolling one-step forecasts scored by MZ, HMSE, QLIKE");
    std::string ev_fit, ev_returns, ev_measures, ev_split, ev_proxy;
    std::string ev_scheme = "fixed";
    std::string ev_out = "report.json", ev_forecasts;
    int ev_refit = 20;
    std::size_t ev_min_in = 100, ev_min_out = 20;
    ev_cmd->add_option("--fit", ev_fit, "fit artifact JSON")->required();
    ev_cmd->add_option("--returns", ev_returns, "returns CSV")->required();
    ev_cmd->add_option("--measures", ev_measures, "measures CSV")->required();
    ev_cmd->add_option("--split", ev_split, "last in-sample date")->required();
    ev_cmd->add_option("--scheme", ev_scheme, "fixed | refit");
    ev_cmd->add_option("--refit-every", ev_refit, "refit cadence, days");
    ev_cmd->add_option("--proxy", ev_proxy, "target measure column (default: fit's)");
    ev_cmd->add_option("--min-in", ev_min_in, "minimum in-sample days");
    ev_cmd->add_option("--min-out", ev_min_out, "minimum out-of-sample days");
    ev_cmd->add_option("--out", ev_out, "report JSON");
    ev_cmd->add_option("--forecasts", ev_forecasts, "per-day forecast CSV");

    // ---- run ----
    auto* run_cmd = app.add_subcommand("run", "Full pipeline from one config");
    std::string run_config;
    run_cmd->add_option("--config", run_config, "pipeline config JSON")->required();

    CLI11_PARSE(app, argc, argv);

    if (sim_cmd->parsed()) {
        pipeline::PipelineConfig cfg;
        if (!sim_config.empty()) cfg = pipeline::load_config(sim_config);
        if (sim_seed_set) cfg.sim.seed = sim_seed;
        cfg.sim.validate();
        fs::create_directories(sim_out);
        auto simmed = pipeline::simulate_sessions(cfg.sim, cfg.start_date);
        std::ofstream f(fs::path(sim_out) / "sessions.csv");
        market::write_sessions_csv(f, simmed.sessions);
        std::ofstream g(fs::path(sim_out) / "returns.csv");
        market::write_returns_csv(g, simmed.sessions);
        std::ofstream h(fs::path(sim_out) / "truth.csv");
        pipeline::write_truth_csv(h, simmed);
        std::cout << "simulated " << simmed.sessions.size() << " sessions into "
                  << sim_out << "\n";
        return 0;
    }

    if (ing_cmd->parsed()) {
        pipeline::PipelineConfig cfg;
        if (!ing_config.empty()) cfg = pipeline::load_config(ing_config);
        std::ifstream ticks(ing_ticks);
        if (!ticks) throw DataError("cannot open ticks: " + ing_ticks);
        auto series = market::dedup_same_timestamp(market::parse_ticks(ticks));
        std::vector<std::string> warnings;
        auto raw = market::build_sessions(series, cfg.calendar, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        std::vector<market::TradingSession> sessions;
        for (const auto& r : raw) {
            sessions.push_back(market::sample_grid(r, ing_interval * 60'000LL));
        }
        fs::create_directories(ing_out);
        std::ofstream f(fs::path(ing_out) / "sessions.csv");
        market::write_sessions_csv(f, sessions);
        std::ofstream g(fs::path(ing_out) / "returns.csv");
        market::write_returns_csv(g, sessions);
        std::cout << "built " << sessions.size() << " sessions ("
                  << series.malformed_rows << " malformed tick rows)\n";
        return 0;
    }

    if (est_cmd->parsed()) {
        pipeline::PipelineConfig cfg;
        if (!est_config.empty()) cfg = pipeline::load_config(est_config);
        const auto sessions = load_sessions(est_sessions);
        const auto measures = est::estimate_sessions(sessions, cfg.estimator);
        std::ofstream f(est_out);
        est::write_measures_csv(f, measures, est_annualize);
        std::cout << "estimated " << measures.size() << " days -> " << est_out << "\n";
        return 0;
    }

    if (jmp_cmd->parsed()) {
        pipeline::PipelineConfig cfg;
        if (!jmp_config.empty()) cfg = pipeline::load_config(jmp_config);
        const auto sessions = load_sessions(jmp_sessions);
        const auto filter =
            wavelet::WaveletFilter::by_name(cfg.estimator.detection_filter);
        std::vector<Date> dates;
        std::vector<wavelet::JumpDetection> dets;
        std::size_t total = 0;
        for (const auto& s : sessions) {
            dates.push_back(s.date);
            dets.push_back(wavelet::detect_jumps(s.log_price, filter));
            total += dets.back().jumps.size();
        }
        std::ofstream f(jmp_out);
        pipeline::write_jumps_csv(f, dates, dets);
        std::cout << "flagged " << total << " jumps over " << sessions.size()
                  << " days -> " << jmp_out << "\n";
        return 0;
    }

    if (fit_cmd->parsed()) {
        model::ModelSpec spec;
        spec.family = model::family_from_string(fit_model);
        if (fit_jumps && spec.family == model::Family::realized_garch) {
            spec.family = model::Family::realized_jgarch;
        }
        spec.measure = fit_measure;
        spec.scale = fit_scale;
        if (spec.family == model::Family::realized_jgarch_scale) {
            if (fit_scale < 1) throw ConfigError("scale model needs --scale >= 1");
            spec.measure = "jw_c" + std::to_string(fit_scale);
        }

        std::vector<Date> dates;
        std::vector<double> returns;
        load_returns(fit_returns, dates, returns);

        model::SeriesData data;
        if (spec.has_measurement() || !fit_measures.empty()) {
            if (fit_measures.empty()) {
                throw ConfigError("--measures is required for realized families");
            }
            const auto table = load_measures(fit_measures);
            data = pipeline::align_series(dates, returns,
                                          table, pipeline::measure_column_for(spec));
        } else {
            data.dates = dates;
            data.r = returns;
        }

        model::FitOptions opts;
        opts.min_observations = fit_min_obs;
        const auto result = model::fit(spec, data, opts);
        std::ofstream f(fit_out);
        pipeline::write_fit_json(f, result);
        if (!fit_states.empty()) {
            std::ofstream g(fit_states);
            pipeline::write_states_csv(g, data.dates, result.states);
        }
        std::cout << spec.name() << ": loglik_joint=" << result.loglik_joint
                  << " loglik_partial=" << result.loglik_partial << " ("
                  << result.convergence.status << ")\n";
        return 0;
    }

    if (ev_cmd->parsed()) {
        std::ifstream fin(ev_fit);
        if (!fin) throw DataError("cannot open fit artifact: " + ev_fit);
        const auto artifact = pipeline::read_fit_json(fin);

        std::vector<Date> dates;
        std::vector<double> returns;
        load_returns(ev_returns, dates, returns);
        const auto table = load_measures(ev_measures);
        auto data = pipeline::align_series(
            dates, returns, table, pipeline::measure_column_for(artifact.spec));

        std::vector<double> proxy = data.x;
        if (!ev_proxy.empty()) {
            const auto aligned =
                pipeline::align_series(dates, returns, table, ev_proxy);
            proxy = aligned.x;
        }

        eval::EvalOptions eopts;
        eopts.scheme = ev_scheme;
        eopts.refit_every = ev_refit;
        eopts.min_in_sample = ev_min_in;
        eopts.min_out_sample = ev_min_out;
        model::FitOptions fopts;
        fopts.min_observations = std::max<std::size_t>(ev_min_in, 3);
        const auto roll = eval::rolling_evaluate(artifact.spec, data, proxy,
                                                 Date::parse(ev_split), fopts, eopts);
        auto rep = eval::score_forecasts(roll.records,
                                         "out-of-sample/" + eopts.scheme);
        rep.refit_gaps = roll.refit_gaps;
        std::ofstream f(ev_out);
        pipeline::write_report_json(f, {{pipeline::model_file_stem(artifact.spec), rep}});
        if (!ev_forecasts.empty()) {
            std::ofstream g(ev_forecasts);
            pipeline::write_forecasts_csv(g, roll.records);
        }
        std::cout << "MZ alpha=" << rep.alpha_mz << " beta=" << rep.beta_mz
                  << " R2=" << rep.r2_mz << " HMSE=" << rep.hmse
                  << " QLIKE=" << rep.qlike << " over " << rep.n_obs << " days\n";
        return 0;
    }

    if (run_cmd->parsed()) {
        const std::string text = slurp(run_config, "config");
        const auto cfg = pipeline::parse_config(text);
        const auto dir = pipeline::run_pipeline(cfg, text);
        std::cout << "pipeline complete -> " << dir.string() << "\n";
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
