#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fxvol/common.hpp"
#include "fxvol/market_data.hpp"
#include "fxvol/wavelet.hpp"

namespace fxvol::est {

struct EstimatorConfig {
    // subsampling: G = max(1, round(c_tsrv * N^(2/3))) unless grids_G > 0
    double c_tsrv = 1.0;
    int grids_G = 0;
    // realized kernel: H = round(c_rk * N^(3/5)) when kernel_bandwidth < 0
    double c_rk = 1.0;
    int kernel_bandwidth = -1;
    int bv_stagger = 1;
    // scale decomposition runs on the D4 pair; jump flagging uses Haar, whose
    // level-1 coefficients are exactly half the returns and give the sharpest
    // step response under the universal threshold
    std::string energy_filter = "d4";
    std::string detection_filter = "haar";
    int levels = 4;  // J^m; components = levels + 1
    bool small_sample_adjust = true;
    bool floor_negative = true;

    void validate() const;
};

struct DailyMeasures {
    Date date;
    int n = 0;
    double rv = 0.0;
    double bv = 0.0;
    double tsrv = 0.0;
    double rk = 0.0;
    double jv = 0.0;
    double jwtsrv = 0.0;
    std::vector<double> jwtsrv_components;  // levels + 1 values
    int grids_G = 1;
    int n_jumps = 0;
    bool tsrv_floored = false;
    bool rk_floored = false;
    int jwtsrv_floored_components = 0;
};

double rv(std::span<const double> returns);

// mu1^-2 * N/(N - stagger - 1) * sum |r_k||r_{k-stagger-1}|; stagger 1 is
// the skip-one variant that tolerates MA(1)-type noise.
double bv(std::span<const double> returns, int stagger = 1);

int auto_grids(std::size_t n_returns, double c_tsrv);
int auto_kernel_bandwidth(std::size_t n_returns, double c_rk);

struct TsrvResult {
    double value = 0.0;
    int grids = 1;
    bool floored = false;
};
TsrvResult tsrv(std::span<const double> log_prices, const EstimatorConfig& cfg);

double parzen_weight(double x);
double realized_kernel(std::span<const double> returns, int bandwidth);

double jump_variation(const wavelet::JumpDetection& jd);

struct JwtsrvResult {
    double total = 0.0;
    std::vector<double> components;
    double jv = 0.0;
    int grids = 1;
    int floored_components = 0;
    int n_jumps = 0;
};
JwtsrvResult jwtsrv(std::span<const double> log_prices, const EstimatorConfig& cfg);

DailyMeasures estimate_day(const market::TradingSession& session,
                           const EstimatorConfig& cfg);
std::vector<DailyMeasures> estimate_sessions(
    std::span<const market::TradingSession> sessions, const EstimatorConfig& cfg);

// columns: date,n,rv,bv,tsrv,rk,jv,jwtsrv,jw_c1..jw_cK,g
// annualize=true converts every variance column v to sqrt(252 v).
void write_measures_csv(std::ostream& out, std::span<const DailyMeasures> rows,
                        bool annualize = false);

struct MeasureTable {
    std::vector<Date> dates;
    std::vector<std::string> columns;        // measure column names
    std::vector<std::vector<double>> values; // values[row][column]
    std::vector<double> column_values(const std::string& name) const;
    bool has_column(const std::string& name) const;
};
MeasureTable read_measures_csv(std::istream& in);

}  // namespace fxvol::est
