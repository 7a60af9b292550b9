#include "fxvol/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "fxvol/csv.hpp"
#include "fxvol/kernels.hpp"

namespace fxvol::est {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::vector<double> diff(std::span<const double> log_prices) {
    std::vector<double> r(log_prices.size() - 1);
    for (std::size_t k = 1; k < log_prices.size(); ++k) {
        r[k - 1] = log_prices[k] - log_prices[k - 1];
    }
    return r;
}

// Flattens negative components to zero and takes the deficit out of the
// positive ones proportionally, keeping the component sum equal to the
// original total. A non-positive total floors everything.
int floor_components(std::vector<double>& c, double& total) {
    double pos = 0.0, neg = 0.0;
    for (double v : c) (v >= 0.0 ? pos : neg) += v;
    if (neg == 0.0) return 0;

    int floored = 0;
    if (total <= 0.0 || pos <= 0.0) {
        floored = static_cast<int>(c.size());
        std::fill(c.begin(), c.end(), 0.0);
        total = 0.0;
        return floored;
    }
    const double scale = total / pos;
    for (double& v : c) {
        if (v < 0.0) {
            v = 0.0;
            ++floored;
        } else {
            v *= scale;
        }
    }
    return floored;
}

}  // namespace

void EstimatorConfig::validate() const {
    if (c_tsrv <= 0) throw ConfigError("estimator: c_tsrv must be > 0");
    if (c_rk <= 0) throw ConfigError("estimator: c_rk must be > 0");
    if (levels < 1) throw ConfigError("estimator: levels must be >= 1");
    if (bv_stagger < 0) throw ConfigError("estimator: bv_stagger must be >= 0");
    wavelet::WaveletFilter::by_name(energy_filter);
    wavelet::WaveletFilter::by_name(detection_filter);
}

double rv(std::span<const double> returns) {
    if (returns.empty()) throw DataError("rv: empty return vector");
    return kernels::sum_squares(returns);
}

double bv(std::span<const double> returns, int stagger) {
    const std::size_t n = returns.size();
    const std::size_t lag = static_cast<std::size_t>(stagger) + 1;
    if (n < lag + 1) {
        throw DataError("bv: need at least stagger + 2 returns");
    }
    const double raw = kernels::abs_lag_prod_sum(returns, lag);
    const double mu1_sq = 2.0 / kPi;
    const double small_sample = static_cast<double>(n) / static_cast<double>(n - lag);
    return raw / mu1_sq * small_sample;
}

int auto_grids(std::size_t n_returns, double c_tsrv) {
    const double g = c_tsrv * std::pow(static_cast<double>(n_returns), 2.0 / 3.0);
    long gi = std::lround(g);
    if (gi < 1) gi = 1;
    if (gi > static_cast<long>(n_returns)) gi = static_cast<long>(n_returns);
    return static_cast<int>(gi);
}

int auto_kernel_bandwidth(std::size_t n_returns, double c_rk) {
    long h = std::lround(c_rk * std::pow(static_cast<double>(n_returns), 3.0 / 5.0));
    if (h < 0) h = 0;
    if (h >= static_cast<long>(n_returns)) h = static_cast<long>(n_returns) - 1;
    return static_cast<int>(h);
}

TsrvResult tsrv(std::span<const double> log_prices, const EstimatorConfig& cfg) {
    if (log_prices.size() < 3) throw DataError("tsrv: need at least 2 returns");
    const auto r = diff(log_prices);
    const std::size_t n = r.size();
    const int G = cfg.grids_G > 0 ? std::min<int>(cfg.grids_G, static_cast<int>(n))
                                  : auto_grids(n, cfg.c_tsrv);

    TsrvResult res;
    res.grids = G;
    const double qv_all = kernels::sum_squares(r);
    if (G == 1) {
        // single grid: the average equals the dense estimate and the
        // small-sample-adjusted two-scale value collapses to plain RV
        res.value = qv_all;
        return res;
    }

    // Each sparse grid spans n_g * G of the N fine intervals; rescaling to
    // the full day removes the edge-loss bias of order G/N while leaving the
    // noise cancellation intact.
    double qv_avg = 0.0;
    std::vector<double> sub;
    for (int g = 0; g < G; ++g) {
        sub.clear();
        for (std::size_t i = static_cast<std::size_t>(g) + G; i < log_prices.size();
             i += G) {
            sub.push_back(log_prices[i] - log_prices[i - G]);
        }
        if (sub.empty()) continue;
        const double span = static_cast<double>(sub.size() * G);
        qv_avg += kernels::sum_squares(sub) * (static_cast<double>(n) / span);
    }
    qv_avg /= static_cast<double>(G);

    const double n_bar = (static_cast<double>(n) - G + 1.0) / G;
    double value = qv_avg - n_bar / static_cast<double>(n) * qv_all;
    if (cfg.small_sample_adjust) value /= 1.0 - n_bar / static_cast<double>(n);
    if (value < 0.0 && cfg.floor_negative) {
        value = 0.0;
        res.floored = true;
    }
    res.value = value;
    return res;
}

double parzen_weight(double x) {
    x = std::fabs(x);
    if (x <= 0.5) return 1.0 - 6.0 * x * x + 6.0 * x * x * x;
    if (x <= 1.0) {
        const double y = 1.0 - x;
        return 2.0 * y * y * y;
    }
    return 0.0;
}

double realized_kernel(std::span<const double> returns, int bandwidth) {
    const std::size_t n = returns.size();
    if (n == 0) throw DataError("realized_kernel: empty return vector");
    if (bandwidth < 0 || static_cast<std::size_t>(bandwidth) >= n) {
        throw DataError("realized_kernel: bandwidth must satisfy 0 <= H < N");
    }
    double rk = kernels::sum_squares(returns);
    for (int h = 1; h <= bandwidth; ++h) {
        const double gamma_h =
            kernels::dot(returns.subspan(h), returns.first(n - h));
        rk += parzen_weight((h - 1.0) / bandwidth) * 2.0 * gamma_h;
    }
    return rk;
}

double jump_variation(const wavelet::JumpDetection& jd) {
    double jv = 0.0;
    for (const auto& j : jd.jumps) jv += j.size * j.size;
    return jv;
}

JwtsrvResult jwtsrv(std::span<const double> log_prices, const EstimatorConfig& cfg) {
    const auto det = wavelet::WaveletFilter::by_name(cfg.detection_filter);
    const auto energy = wavelet::WaveletFilter::by_name(cfg.energy_filter);
    if (log_prices.size() < static_cast<std::size_t>(energy.length()) ||
        log_prices.size() < static_cast<std::size_t>(det.length())) {
        throw DataError("jwtsrv: series shorter than the wavelet filter");
    }

    const auto jd = wavelet::detect_jumps(log_prices, det);
    const auto adj = wavelet::jump_adjust(log_prices, jd);
    const auto r = diff(adj);
    const std::size_t n = r.size();
    const int J = cfg.levels;
    const int G = cfg.grids_G > 0 ? std::min<int>(cfg.grids_G, static_cast<int>(n))
                                  : auto_grids(n, cfg.c_tsrv);

    JwtsrvResult res;
    res.grids = G;
    res.jv = jump_variation(jd);
    res.n_jumps = static_cast<int>(jd.jumps.size());

    // Scale energies of the dense return series; the scaling band is the
    // last component, so the levels+1 energies sum to RV exactly.
    const auto all = wavelet::modwt_unchecked(r, energy, J);
    const std::vector<double> e_all = all.level_energies();

    if (G == 1) {
        res.components.assign(e_all.begin(), e_all.end());
        for (double c : res.components) res.total += c;
        return res;
    }

    // Average scale energies over the G sparse grids. Subgrids are usually
    // shorter than the deep-level filters; the unchecked transform keeps the
    // circular energy identity, so component additivity to the two-scale
    // total is preserved.
    std::vector<double> e_avg(J + 1, 0.0);
    std::vector<double> sub;
    for (int g = 0; g < G; ++g) {
        sub.clear();
        for (std::size_t i = static_cast<std::size_t>(g) + G; i < adj.size(); i += G) {
            sub.push_back(adj[i] - adj[i - G]);
        }
        if (sub.empty()) continue;
        const double scale =
            static_cast<double>(n) / static_cast<double>(sub.size() * G);
        const auto pyr = wavelet::modwt_unchecked(sub, energy, J);
        const auto e = pyr.level_energies();
        for (int j = 0; j <= J; ++j) e_avg[j] += e[j] * scale;
    }
    for (double& e : e_avg) e /= static_cast<double>(G);

    const double n_bar = (static_cast<double>(n) - G + 1.0) / G;
    const double bias = n_bar / static_cast<double>(n);
    const double adjust = cfg.small_sample_adjust ? 1.0 / (1.0 - bias) : 1.0;

    res.components.resize(J + 1);
    for (int j = 0; j <= J; ++j) {
        res.components[j] = (e_avg[j] - bias * e_all[j]) * adjust;
        res.total += res.components[j];
    }
    if (cfg.floor_negative) {
        res.floored_components = floor_components(res.components, res.total);
    }
    return res;
}

DailyMeasures estimate_day(const market::TradingSession& session,
                           const EstimatorConfig& cfg) {
    cfg.validate();
    const auto& r = session.returns;
    if (r.empty()) {
        throw DataError("estimate_day: session " + session.date.to_string() +
                        " has no returns");
    }

    DailyMeasures m;
    m.date = session.date;
    m.n = static_cast<int>(r.size());
    try {
        m.rv = rv(r);
        m.bv = bv(r, cfg.bv_stagger);

        const auto ts = tsrv(session.log_price, cfg);
        m.tsrv = ts.value;
        m.grids_G = ts.grids;
        m.tsrv_floored = ts.floored;

        const int H = cfg.kernel_bandwidth >= 0
                          ? std::min<int>(cfg.kernel_bandwidth,
                                          static_cast<int>(r.size()) - 1)
                          : auto_kernel_bandwidth(r.size(), cfg.c_rk);
        m.rk = realized_kernel(r, H);
        if (m.rk < 0.0 && cfg.floor_negative) {
            m.rk = 0.0;
            m.rk_floored = true;
        }

        const auto jw = jwtsrv(session.log_price, cfg);
        m.jv = jw.jv;
        m.jwtsrv = jw.total;
        m.jwtsrv_components = jw.components;
        m.n_jumps = jw.n_jumps;
        m.jwtsrv_floored_components = jw.floored_components;
    } catch (const std::exception& e) {
        throw DataError("estimate_day " + session.date.to_string() + ": " + e.what());
    }
    return m;
}

std::vector<DailyMeasures> estimate_sessions(
    std::span<const market::TradingSession> sessions, const EstimatorConfig& cfg) {
    std::vector<DailyMeasures> out;
    out.reserve(sessions.size());
    for (const auto& s : sessions) out.push_back(estimate_day(s, cfg));
    return out;
}

namespace {
double maybe_annualize(double v, bool annualize) {
    return annualize ? std::sqrt(252.0 * v) : v;
}
}  // namespace

void write_measures_csv(std::ostream& out, std::span<const DailyMeasures> rows,
                        bool annualize) {
    const std::size_t n_comp = rows.empty() ? 5 : rows.front().jwtsrv_components.size();
    out << "date,n,rv,bv,tsrv,rk,jv,jwtsrv";
    for (std::size_t j = 1; j <= n_comp; ++j) out << ",jw_c" << j;
    out << ",g\n";
    for (const auto& m : rows) {
        out << m.date.to_string() << ',' << m.n << ','
            << csv::fmt(maybe_annualize(m.rv, annualize)) << ','
            << csv::fmt(maybe_annualize(m.bv, annualize)) << ','
            << csv::fmt(maybe_annualize(m.tsrv, annualize)) << ','
            << csv::fmt(maybe_annualize(m.rk, annualize)) << ','
            << csv::fmt(maybe_annualize(m.jv, annualize)) << ','
            << csv::fmt(maybe_annualize(m.jwtsrv, annualize));
        for (double c : m.jwtsrv_components) {
            out << ',' << csv::fmt(maybe_annualize(c, annualize));
        }
        out << ',' << m.grids_G << '\n';
    }
}

std::vector<double> MeasureTable::column_values(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] == name) {
            std::vector<double> out(values.size());
            for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i][c];
            return out;
        }
    }
    throw DataError("measures table: no column '" + name + "'");
}

bool MeasureTable::has_column(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

MeasureTable read_measures_csv(std::istream& in) {
    auto t = csv::read_table(in, "measures CSV");
    const int c_date = t.require_column("date");
    MeasureTable m;
    for (const auto& h : t.header) {
        if (h != "date") m.columns.push_back(h);
    }
    for (const auto& row : t.rows) {
        m.dates.push_back(Date::parse(row[c_date]));
        std::vector<double> vals;
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            if (static_cast<int>(c) == c_date) continue;
            vals.push_back(csv::parse_double(row[c]));
        }
        m.values.push_back(std::move(vals));
    }
    return m;
}

}  // namespace fxvol::est
