#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fxvol/common.hpp"
#include "fxvol/estimators.hpp"
#include "fxvol/evaluation.hpp"
#include "fxvol/market_data.hpp"
#include "fxvol/models.hpp"
#include "fxvol/simulator.hpp"

namespace fxvol::pipeline {

struct PipelineConfig {
    std::string mode = "simulate";  // "simulate" | "ingest"
    std::filesystem::path out_dir = "artifacts";
    std::filesystem::path ticks_path;
    Date start_date{2020, 1, 1};  // session labels in simulate mode
    sim::SimConfig sim;
    market::SessionCalendar calendar;
    int interval_minutes = 5;
    est::EstimatorConfig estimator;
    std::vector<model::ModelSpec> models;
    model::FitOptions fit;
    std::optional<Date> split_date;
    eval::EvalOptions eval;
    bool annualize = false;

    void validate() const;
};

PipelineConfig load_config(const std::filesystem::path& file);
PipelineConfig parse_config(const std::string& json_text);

// Deterministic 64-bit FNV-1a over the canonical config text.
std::string config_hash(const std::string& json_text);

// simulate-mode sessions with synthetic dates and per-day truth
struct SimulatedSessions {
    std::vector<market::TradingSession> sessions;
    std::vector<double> true_iv, true_jv;
    std::vector<int> n_jumps;
};
SimulatedSessions simulate_sessions(const sim::SimConfig& cfg, Date start_date);

void write_truth_csv(std::ostream& out, const SimulatedSessions& s);

// inner join of returns and measures on date
model::SeriesData align_series(const std::vector<Date>& r_dates,
                               const std::vector<double>& returns,
                               const est::MeasureTable& measures,
                               const std::string& measure_column);

std::string measure_column_for(const model::ModelSpec& spec);
std::string model_file_stem(const model::ModelSpec& spec);

void write_fit_json(std::ostream& out, const model::FitResult& fit);
struct FitArtifact {
    model::ModelSpec spec;
    model::ParamVector theta;
    double h1 = 0.0;
};
FitArtifact read_fit_json(std::istream& in);

void write_states_csv(std::ostream& out, const std::vector<Date>& dates,
                      const model::FilteredStates& st);
void write_forecasts_csv(std::ostream& out,
                         std::span<const eval::ForecastRecord> records);
void write_report_json(std::ostream& out,
                       const std::vector<std::pair<std::string, eval::EvalReport>>& reports);
void write_jumps_csv(std::ostream& out, const std::vector<Date>& dates,
                     const std::vector<wavelet::JumpDetection>& detections);

// Full run: sessions -> measures -> jumps -> fits -> forecasts -> report ->
// plotdata + manifest. Throws; partial artifacts stay on disk. Returns the
// artifact directory.
std::filesystem::path run_pipeline(const PipelineConfig& cfg,
                                   const std::string& config_text);

}  // namespace fxvol::pipeline
