#include "fxvol/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fxvol/csv.hpp"

namespace fxvol::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int parse_hhmm(const std::string& s) {
    int hh = 0, mm = 0;
    if (std::sscanf(s.c_str(), "%d:%d", &hh, &mm) != 2 || hh < 0 || hh > 23 ||
        mm < 0 || mm > 59) {
        throw ConfigError("bad wall-clock time '" + s + "', expected HH:MM");
    }
    return hh * 60 + mm;
}

sim::VolModel vol_model_from_string(const std::string& s) {
    if (s == "constant") return sim::VolModel::constant;
    if (s == "diurnal") return sim::VolModel::diurnal;
    if (s == "ou_daily") return sim::VolModel::ou_daily;
    throw ConfigError("unknown vol_model '" + s + "'");
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void PipelineConfig::validate() const {
    if (mode != "simulate" && mode != "ingest") {
        throw ConfigError("mode must be 'simulate' or 'ingest'");
    }
    if (mode == "ingest" && ticks_path.empty()) {
        throw ConfigError("ingest mode requires ticks_path");
    }
    if (models.empty()) {
        throw ConfigError("config lists no model specs");
    }
    if (interval_minutes <= 0) throw ConfigError("interval_minutes must be > 0");
    sim.validate();
    estimator.validate();
    for (const auto& m : models) {
        if (m.family == model::Family::realized_jgarch_scale &&
            (m.scale < 1 || m.scale > estimator.levels + 1)) {
            throw ConfigError("scale model index out of range 1.." +
                              std::to_string(estimator.levels + 1));
        }
    }
}

PipelineConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    PipelineConfig cfg;
    maybe(j, "mode", cfg.mode);
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("ticks_path")) cfg.ticks_path = j.at("ticks_path").get<std::string>();
    if (j.contains("start_date")) cfg.start_date = Date::parse(j.at("start_date"));
    if (j.contains("split_date")) cfg.split_date = Date::parse(j.at("split_date"));
    maybe(j, "annualize", cfg.annualize);
    maybe(j, "interval_minutes", cfg.interval_minutes);

    if (j.contains("sim")) {
        const json& s = j.at("sim");
        maybe(s, "n_intraday", cfg.sim.n_intraday);
        maybe(s, "days", cfg.sim.days);
        maybe(s, "mu", cfg.sim.mu);
        maybe(s, "sigma", cfg.sim.sigma);
        if (s.contains("vol_model")) {
            cfg.sim.vol_model = vol_model_from_string(s.at("vol_model"));
        }
        maybe(s, "diurnal_amplitude", cfg.sim.diurnal_amplitude);
        maybe(s, "ou_kappa", cfg.sim.ou_kappa);
        maybe(s, "ou_vol", cfg.sim.ou_vol);
        maybe(s, "noise_std", cfg.sim.noise_std);
        maybe(s, "student_t_noise", cfg.sim.student_t_noise);
        maybe(s, "noise_t_dof", cfg.sim.noise_t_dof);
        maybe(s, "jumps_per_day", cfg.sim.jumps_per_day);
        maybe(s, "jump_mean", cfg.sim.jump_mean);
        maybe(s, "jump_std", cfg.sim.jump_std);
        maybe(s, "initial_log_price", cfg.sim.initial_log_price);
        maybe(s, "seed", cfg.sim.seed);
    }
    if (j.contains("seed")) cfg.sim.seed = j.at("seed").get<std::uint64_t>();

    if (j.contains("calendar")) {
        const json& c = j.at("calendar");
        if (c.contains("timezone")) {
            cfg.calendar.utc_offset_minutes =
                market::parse_utc_offset(c.at("timezone"));
        }
        if (c.contains("open")) cfg.calendar.open_minutes = parse_hhmm(c.at("open"));
        if (c.contains("close")) cfg.calendar.close_minutes = parse_hhmm(c.at("close"));
        maybe(c, "exclude_weekends", cfg.calendar.exclude_weekends);
        if (c.contains("min_ticks")) {
            cfg.calendar.min_ticks = c.at("min_ticks").get<std::size_t>();
        }
        if (c.contains("excluded_dates")) {
            for (const auto& d : c.at("excluded_dates")) {
                cfg.calendar.excluded_dates.insert(Date::parse(d.get<std::string>()));
            }
        }
    }

    if (j.contains("estimator")) {
        const json& e = j.at("estimator");
        maybe(e, "c_tsrv", cfg.estimator.c_tsrv);
        maybe(e, "grids_G", cfg.estimator.grids_G);
        maybe(e, "c_rk", cfg.estimator.c_rk);
        maybe(e, "kernel_bandwidth", cfg.estimator.kernel_bandwidth);
        maybe(e, "bv_stagger", cfg.estimator.bv_stagger);
        maybe(e, "energy_filter", cfg.estimator.energy_filter);
        maybe(e, "detection_filter", cfg.estimator.detection_filter);
        maybe(e, "levels", cfg.estimator.levels);
        maybe(e, "small_sample_adjust", cfg.estimator.small_sample_adjust);
        maybe(e, "floor_negative", cfg.estimator.floor_negative);
    }

    if (j.contains("models")) {
        for (const auto& m : j.at("models")) {
            model::ModelSpec spec;
            spec.family = model::family_from_string(m.at("family"));
            if (m.contains("measure")) spec.measure = m.at("measure").get<std::string>();
            if (m.contains("scale")) spec.scale = m.at("scale").get<int>();
            if (spec.family == model::Family::realized_jgarch_scale) {
                if (spec.scale < 1) spec.scale = 1;
                spec.measure = "jw_c" + std::to_string(spec.scale);
            }
            cfg.models.push_back(spec);
        }
    }

    if (j.contains("fit")) {
        const json& f = j.at("fit");
        if (f.contains("min_observations")) {
            cfg.fit.min_observations = f.at("min_observations").get<std::size_t>();
        }
        maybe(f, "max_iterations", cfg.fit.max_iterations);
        maybe(f, "x_floor", cfg.fit.x_floor);
        maybe(f, "require_convergence", cfg.fit.require_convergence);
    }

    if (j.contains("eval")) {
        const json& e = j.at("eval");
        maybe(e, "scheme", cfg.eval.scheme);
        maybe(e, "refit_every", cfg.eval.refit_every);
        if (e.contains("min_in_sample")) {
            cfg.eval.min_in_sample = e.at("min_in_sample").get<std::size_t>();
        }
        if (e.contains("min_out_sample")) {
            cfg.eval.min_out_sample = e.at("min_out_sample").get<std::size_t>();
        }
    }
    return cfg;
}

PipelineConfig load_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SimulatedSessions simulate_sessions(const sim::SimConfig& cfg, Date start_date) {
    SimulatedSessions out;
    const std::int64_t interval_ms = 82'800'000 / cfg.n_intraday;  // 23h session
    Date d = start_date;
    for (int day = 0; day < cfg.days; ++day) {
        const auto sd = sim::simulate_day(cfg, day);
        market::TradingSession s;
        s.date = d;
        const std::int64_t base = d.serial() * 86'400'000;
        s.log_price = sd.observed_log_price;
        s.grid_ms.resize(s.log_price.size());
        for (std::size_t k = 0; k < s.log_price.size(); ++k) {
            s.grid_ms[k] = base + static_cast<std::int64_t>(k) * interval_ms;
        }
        s.returns.resize(s.log_price.size() - 1);
        for (std::size_t k = 1; k < s.log_price.size(); ++k) {
            s.returns[k - 1] = s.log_price[k] - s.log_price[k - 1];
        }
        s.open_close_return = s.log_price.back() - s.log_price.front();
        out.sessions.push_back(std::move(s));
        out.true_iv.push_back(sd.true_iv);
        out.true_jv.push_back(sd.true_jv);
        out.n_jumps.push_back(static_cast<int>(sd.jump_indices.size()));
        d = d.next_day();
    }
    return out;
}

void write_truth_csv(std::ostream& out, const SimulatedSessions& s) {
    out << "date,true_iv,true_jv,n_jumps\n";
    for (std::size_t i = 0; i < s.sessions.size(); ++i) {
        out << s.sessions[i].date.to_string() << ',' << csv::fmt(s.true_iv[i]) << ','
            << csv::fmt(s.true_jv[i]) << ',' << s.n_jumps[i] << '\n';
    }
}

model::SeriesData align_series(const std::vector<Date>& r_dates,
                               const std::vector<double>& returns,
                               const est::MeasureTable& measures,
                               const std::string& measure_column) {
    const auto x = measures.column_values(measure_column);
    const bool has_jv = measures.has_column("jv");
    const auto jv = has_jv ? measures.column_values("jv") : std::vector<double>{};

    std::map<Date, std::pair<double, double>> by_date;
    for (std::size_t i = 0; i < measures.dates.size(); ++i) {
        by_date[measures.dates[i]] = {x[i], has_jv ? jv[i] : 0.0};
    }
    model::SeriesData out;
    for (std::size_t i = 0; i < r_dates.size(); ++i) {
        const auto it = by_date.find(r_dates[i]);
        if (it == by_date.end()) continue;
        out.dates.push_back(r_dates[i]);
        out.r.push_back(returns[i]);
        out.x.push_back(it->second.first);
        out.jv.push_back(it->second.second);
    }
    if (out.dates.empty()) {
        throw DataError("alignment: returns and measures share no dates");
    }
    return out;
}

std::string measure_column_for(const model::ModelSpec& spec) {
    if (spec.family == model::Family::realized_jgarch_scale) {
        return "jw_c" + std::to_string(spec.scale);
    }
    return spec.measure;
}

std::string model_file_stem(const model::ModelSpec& spec) {
    std::string s = model::family_to_string(spec.family);
    if (spec.family == model::Family::realized_jgarch_scale) {
        s += "_c" + std::to_string(spec.scale);
    } else if (spec.has_measurement()) {
        s += "_" + spec.measure;
    }
    return s;
}

namespace {

json theta_json(const model::ModelSpec& spec, const model::ParamVector& th,
                const std::vector<double>& se) {
    const auto names = model::ParamVector::param_names(spec.family);
    const auto packed = th.pack(spec.family);
    json jt, js;
    for (std::size_t i = 0; i < names.size(); ++i) {
        jt[names[i]] = packed[i];
        if (i < se.size()) js[names[i]] = se[i];
    }
    return json{{"theta", jt}, {"se", js}};
}

}  // namespace

void write_fit_json(std::ostream& out, const model::FitResult& fit) {
    json j = theta_json(fit.spec, fit.theta, fit.std_errors);
    j["spec"] = {{"family", model::family_to_string(fit.spec.family)},
                 {"measure", fit.spec.measure},
                 {"scale", fit.spec.scale}};
    j["loglik_joint"] = fit.loglik_joint;
    j["loglik_partial"] = fit.loglik_partial;
    j["convergence"] = {{"iterations", fit.convergence.iterations},
                        {"grad_norm", fit.convergence.grad_norm},
                        {"converged", fit.convergence.converged},
                        {"status", fit.convergence.status}};
    j["h1"] = fit.h1;
    j["n_obs"] = fit.states.h.size();
    j["floored_x"] = fit.floored_x;
    out << j.dump(2) << '\n';
}

FitArtifact read_fit_json(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError(std::string("fit artifact is not valid JSON: ") + e.what());
    }
    FitArtifact a;
    a.spec.family = model::family_from_string(j.at("spec").at("family"));
    a.spec.measure = j.at("spec").at("measure").get<std::string>();
    a.spec.scale = j.at("spec").at("scale").get<int>();
    const auto names = model::ParamVector::param_names(a.spec.family);
    std::vector<double> packed;
    for (const auto& n : names) packed.push_back(j.at("theta").at(n).get<double>());
    a.theta = model::ParamVector::unpack(a.spec.family, packed);
    a.h1 = j.value("h1", 0.0);
    return a;
}

void write_states_csv(std::ostream& out, const std::vector<Date>& dates,
                      const model::FilteredStates& st) {
    out << "date,h,z,u\n";
    for (std::size_t t = 0; t < st.h.size(); ++t) {
        out << dates[t].to_string() << ',' << csv::fmt(st.h[t]) << ','
            << csv::fmt(st.z[t]) << ','
            << csv::fmt(st.u.empty() ? 0.0 : st.u[t]) << '\n';
    }
}

void write_forecasts_csv(std::ostream& out,
                         std::span<const eval::ForecastRecord> records) {
    out << "date,h_forecast,vol_forecast,target\n";
    for (const auto& r : records) {
        out << r.date.to_string() << ',' << csv::fmt(r.h_forecast) << ','
            << csv::fmt(r.vol_forecast) << ',' << csv::fmt(r.target_vol) << '\n';
    }
}

void write_report_json(
    std::ostream& out,
    const std::vector<std::pair<std::string, eval::EvalReport>>& reports) {
    json j;
    for (const auto& [name, rep] : reports) {
        j[name] = {{"alpha_mz", rep.alpha_mz}, {"beta_mz", rep.beta_mz},
                   {"r2_mz", rep.r2_mz},       {"hmse", rep.hmse},
                   {"qlike", rep.qlike},       {"n_obs", rep.n_obs},
                   {"scheme", rep.window},     {"refit_gaps", rep.refit_gaps}};
    }
    out << j.dump(2) << '\n';
}

void write_jumps_csv(std::ostream& out, const std::vector<Date>& dates,
                     const std::vector<wavelet::JumpDetection>& detections) {
    out << "date,k,jump_size,threshold,d_t\n";
    for (std::size_t i = 0; i < detections.size(); ++i) {
        for (const auto& j : detections[i].jumps) {
            out << dates[i].to_string() << ',' << j.index << ',' << csv::fmt(j.size)
                << ',' << csv::fmt(detections[i].threshold) << ','
                << csv::fmt(detections[i].d_scale) << '\n';
        }
    }
}

std::filesystem::path run_pipeline(const PipelineConfig& cfg,
                                   const std::string& config_text) {
    cfg.validate();
    const fs::path dir = cfg.out_dir;
    std::string stage = "setup";
    try {
        fs::create_directories(dir / "sessions");
        fs::create_directories(dir / "fits");
        fs::create_directories(dir / "forecasts");
        fs::create_directories(dir / "plotdata");

        // ---- sessions ----
        stage = "sessions";
        std::vector<market::TradingSession> sessions;
        if (cfg.mode == "simulate") {
            auto simmed = simulate_sessions(cfg.sim, cfg.start_date);
            sessions = std::move(simmed.sessions);
            std::ofstream truth(dir / "sessions" / "truth.csv");
            write_truth_csv(truth, simmed);
        } else {
            std::ifstream ticks(cfg.ticks_path);
            if (!ticks) throw DataError("cannot open ticks: " + cfg.ticks_path.string());
            auto series = market::dedup_same_timestamp(market::parse_ticks(ticks));
            auto raw = market::build_sessions(series, cfg.calendar);
            for (const auto& r : raw) {
                sessions.push_back(
                    market::sample_grid(r, cfg.interval_minutes * 60'000LL));
            }
        }
        if (sessions.empty()) throw DataError("no sessions to process");
        {
            std::ofstream f(dir / "sessions" / "sessions.csv");
            market::write_sessions_csv(f, sessions);
            std::ofstream g(dir / "sessions" / "returns.csv");
            market::write_returns_csv(g, sessions);
        }

        // ---- daily measures ----
        stage = "estimate";
        const auto measures = est::estimate_sessions(sessions, cfg.estimator);
        {
            std::ofstream f(dir / "measures.csv");
            est::write_measures_csv(f, measures, false);
            if (cfg.annualize) {
                std::ofstream g(dir / "measures_annualized.csv");
                est::write_measures_csv(g, measures, true);
            }
        }

        // ---- jump detail ----
        stage = "jumps";
        {
            const auto det_filter =
                wavelet::WaveletFilter::by_name(cfg.estimator.detection_filter);
            std::vector<Date> dates;
            std::vector<wavelet::JumpDetection> dets;
            for (const auto& s : sessions) {
                dates.push_back(s.date);
                dets.push_back(wavelet::detect_jumps(s.log_price, det_filter));
            }
            std::ofstream f(dir / "plotdata" / "jumps.csv");
            write_jumps_csv(f, dates, dets);
        }

        // ---- component plot data ----
        stage = "plotdata";
        {
            std::ofstream f(dir / "plotdata" / "components_annualized.csv");
            const std::size_t n_comp =
                measures.empty() ? 0 : measures.front().jwtsrv_components.size();
            f << "date";
            for (std::size_t j = 1; j <= n_comp; ++j) f << ",ann_var_c" << j;
            f << ",ann_var_total,ann_vol_total\n";
            for (const auto& m : measures) {
                f << m.date.to_string();
                for (double c : m.jwtsrv_components) f << ',' << csv::fmt(252.0 * c);
                f << ',' << csv::fmt(252.0 * m.jwtsrv) << ','
                  << csv::fmt(eval::annualize(m.jwtsrv)) << '\n';
            }
        }

        // ---- fits ----
        stage = "fit";
        std::vector<Date> r_dates;
        std::vector<double> returns;
        for (const auto& s : sessions) {
            r_dates.push_back(s.date);
            returns.push_back(s.open_close_return);
        }
        est::MeasureTable table;
        {
            std::ostringstream ss;
            est::write_measures_csv(ss, measures, false);
            std::istringstream is(ss.str());
            table = est::read_measures_csv(is);
        }

        std::vector<model::FitResult> fits;
        std::vector<std::pair<std::string, eval::EvalReport>> reports;
        for (const auto& spec : cfg.models) {
            const std::string column =
                spec.has_measurement() ? measure_column_for(spec) : "rv";
            const auto data = align_series(r_dates, returns, table, column);
            const std::string stem = model_file_stem(spec);

            if (cfg.split_date) {
                stage = "evaluate:" + stem;
                auto roll = eval::rolling_evaluate(spec, data, data.x,
                                                   *cfg.split_date, cfg.fit, cfg.eval);
                fits.push_back(roll.in_sample_fit);
                {
                    std::ofstream f(dir / "fits" / (stem + ".json"));
                    write_fit_json(f, roll.in_sample_fit);
                    std::ofstream g(dir / "fits" / (stem + "_states.csv"));
                    write_states_csv(g, data.dates, roll.in_sample_fit.states);
                    std::ofstream h(dir / "forecasts" / (stem + ".csv"));
                    write_forecasts_csv(h, roll.records);
                }
                auto rep = eval::score_forecasts(
                    roll.records, "out-of-sample/" + cfg.eval.scheme);
                rep.refit_gaps = roll.refit_gaps;
                reports.emplace_back(stem, rep);
            } else {
                stage = "fit:" + stem;
                auto f = model::fit(spec, data, cfg.fit);
                fits.push_back(f);
                std::ofstream of(dir / "fits" / (stem + ".json"));
                write_fit_json(of, f);
                std::ofstream g(dir / "fits" / (stem + "_states.csv"));
                write_states_csv(g, data.dates, f.states);
            }
        }
        if (!reports.empty()) {
            std::ofstream f(dir / "report.json");
            write_report_json(f, reports);
        }

        // ---- manifest ----
        stage = "manifest";
        {
            nlohmann::json m;
            m["config_hash"] = config_hash(config_text);
            m["version"] = kVersion;
            m["n_sessions"] = sessions.size();
            std::vector<std::string> names;
            for (const auto& s : cfg.models) names.push_back(model_file_stem(s));
            m["models"] = names;
            std::ofstream f(dir / "manifest.json");
            f << m.dump(2) << '\n';
        }
    } catch (...) {
        std::fprintf(stderr, "pipeline stage '%s' failed\n", stage.c_str());
        throw;
    }
    return dir;
}

}  // namespace fxvol::pipeline
