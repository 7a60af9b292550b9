#include "fxvol/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include "fxvol/csv.hpp"

namespace fxvol::market {

namespace {
constexpr std::int64_t kMsPerMinute = 60'000;
constexpr std::int64_t kMsPerDay = 86'400'000;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
}  // namespace

int parse_utc_offset(const std::string& tz) {
    if (tz.empty() || tz == "UTC" || tz == "utc") return 0;
    int sign = 0;
    std::size_t pos = 0;
    if (tz.rfind("UTC", 0) == 0) pos = 3;
    if (pos >= tz.size()) return 0;
    if (tz[pos] == '+') sign = 1;
    else if (tz[pos] == '-') sign = -1;
    else throw ConfigError("unsupported timezone '" + tz + "' (use UTC or UTC±HH:MM)");
    int hh = 0, mm = 0;
    const std::string rest = tz.substr(pos + 1);
    if (std::sscanf(rest.c_str(), "%d:%d", &hh, &mm) < 1 || hh > 14 || mm > 59) {
        throw ConfigError("unsupported timezone '" + tz + "' (use UTC or UTC±HH:MM)");
    }
    return sign * (hh * 60 + mm);
}

TickSeries parse_ticks(std::istream& in, std::string instrument) {
    TickSeries out;
    out.instrument = std::move(instrument);

    std::string line;
    if (!csv::getline_clean(in, line, true)) {
        throw DataError("tick input: unreadable or empty stream");
    }
    if (line != "timestamp_ms,price") {
        throw DataError("tick input: expected header 'timestamp_ms,price', got '" +
                        line + "'");
    }

    std::size_t line_no = 1;
    std::size_t first_bad_line = 0;
    std::string first_bad_content;
    while (csv::getline_clean(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ++out.total_rows;
        bool ok = false;
        const auto fields = csv::split(line);
        if (fields.size() == 2) {
            try {
                const std::int64_t ts = csv::parse_int(fields[0]);
                const double px = csv::parse_double(fields[1]);
                if (px > 0.0 && std::isfinite(px)) {
                    out.ticks.push_back(Tick{ts, px});
                    ok = true;
                }
            } catch (const DataError&) {
            }
        }
        if (!ok) {
            ++out.malformed_rows;
            if (first_bad_line == 0) {
                first_bad_line = line_no;
                first_bad_content = line;
            }
        }
    }
    if (in.bad()) throw DataError("tick input: stream read failure");

    if (out.total_rows > 0 &&
        static_cast<double>(out.malformed_rows) > 0.01 * static_cast<double>(out.total_rows)) {
        throw DataError("tick input: " + std::to_string(out.malformed_rows) + " of " +
                        std::to_string(out.total_rows) +
                        " rows malformed; first bad line " +
                        std::to_string(first_bad_line) + ": '" + first_bad_content + "'");
    }

    std::stable_sort(out.ticks.begin(), out.ticks.end(),
                     [](const Tick& a, const Tick& b) { return a.ts_ms < b.ts_ms; });
    return out;
}

TickSeries dedup_same_timestamp(const TickSeries& t) {
    TickSeries out;
    out.instrument = t.instrument;
    out.total_rows = t.total_rows;
    out.malformed_rows = t.malformed_rows;
    out.ticks.reserve(t.ticks.size());

    std::size_t i = 0;
    while (i < t.ticks.size()) {
        std::size_t j = i + 1;
        double sum = t.ticks[i].price;
        while (j < t.ticks.size() && t.ticks[j].ts_ms == t.ticks[i].ts_ms) {
            sum += t.ticks[j].price;
            ++j;
        }
        out.ticks.push_back(Tick{t.ticks[i].ts_ms, sum / static_cast<double>(j - i)});
        i = j;
    }
    return out;
}

std::vector<SessionTicks> build_sessions(const TickSeries& t,
                                         const SessionCalendar& cal,
                                         std::vector<std::string>* warnings) {
    const std::int64_t off_ms = static_cast<std::int64_t>(cal.utc_offset_minutes) * kMsPerMinute;
    const int len_min = cal.session_minutes();

    // Map each tick to the label date of the session that contains it.
    std::map<std::int64_t, SessionTicks> by_day;  // key: label date serial
    for (const Tick& tk : t.ticks) {
        const std::int64_t local = tk.ts_ms + off_ms;
        const std::int64_t day = floor_div(local, kMsPerDay);
        const int minute = static_cast<int>((local - day * kMsPerDay) / kMsPerMinute);

        std::int64_t label;
        if (cal.open_minutes > cal.close_minutes || len_min == 1440) {
            if (minute >= cal.open_minutes) label = day + 1;
            else if (minute < cal.close_minutes) label = day;
            else continue;  // maintenance break
        } else {
            if (minute >= cal.open_minutes && minute < cal.close_minutes) label = day;
            else continue;
        }

        auto& s = by_day[label];
        if (s.ticks.empty()) {
            s.date = Date::from_serial(label);
            s.close_ms = label * kMsPerDay + static_cast<std::int64_t>(cal.close_minutes) * kMsPerMinute - off_ms;
            s.open_ms = s.close_ms - static_cast<std::int64_t>(len_min) * kMsPerMinute;
        }
        s.ticks.push_back(tk);
    }

    std::vector<SessionTicks> out;
    for (auto& [day, s] : by_day) {
        if (cal.exclude_weekends && s.date.is_weekend()) continue;
        if (cal.excluded_dates.count(s.date)) continue;
        if (s.ticks.size() < cal.min_ticks) {
            if (warnings) {
                warnings->push_back("session " + s.date.to_string() + " dropped: " +
                                    std::to_string(s.ticks.size()) + " ticks < minimum " +
                                    std::to_string(cal.min_ticks));
            }
            continue;
        }
        out.push_back(std::move(s));
    }
    return out;
}

TradingSession sample_grid(const SessionTicks& s, std::int64_t interval_ms) {
    if (s.ticks.size() < 2) {
        throw DataError("session " + s.date.to_string() + ": fewer than 2 ticks");
    }
    if (interval_ms <= 0) throw ConfigError("grid interval must be positive");

    TradingSession ts;
    ts.date = s.date;
    std::size_t cursor = 0;
    double last_price = s.ticks.front().price;  // back-fill before the first tick
    std::size_t with_prior = 0;
    for (std::int64_t stamp = s.open_ms; stamp <= s.close_ms; stamp += interval_ms) {
        while (cursor < s.ticks.size() && s.ticks[cursor].ts_ms <= stamp) {
            last_price = s.ticks[cursor].price;
            ++cursor;
        }
        if (cursor > 0) ++with_prior;
        ts.grid_ms.push_back(stamp);
        ts.log_price.push_back(std::log(last_price));
    }
    if (with_prior < 2) {
        throw DataError("session " + s.date.to_string() +
                        ": degenerate (fewer than 2 grid points have a preceding tick)");
    }
    ts.returns.resize(ts.log_price.size() - 1);
    for (std::size_t k = 1; k < ts.log_price.size(); ++k) {
        ts.returns[k - 1] = ts.log_price[k] - ts.log_price[k - 1];
    }
    ts.open_close_return = ts.log_price.back() - ts.log_price.front();
    return ts;
}

ReturnStats summary_stats(std::span<const double> r) {
    const std::size_t n = r.size();
    if (n < 4) throw DataError("summary_stats: need at least 4 observations");

    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(n);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : r) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);

    ReturnStats st;
    st.mean = mean;
    st.std_dev = std::sqrt(m2 * static_cast<double>(n) / static_cast<double>(n - 1));
    st.skewness = (m2 > 0.0) ? m3 / std::pow(m2, 1.5) : 0.0;
    st.kurtosis = (m2 > 0.0) ? m4 / (m2 * m2) : 0.0;
    return st;
}

void write_sessions_csv(std::ostream& out, std::span<const TradingSession> sessions) {
    out << "date,k,timestamp_ms,log_price,return\n";
    for (const auto& s : sessions) {
        for (std::size_t k = 0; k < s.log_price.size(); ++k) {
            out << s.date.to_string() << ',' << k << ',' << s.grid_ms[k] << ','
                << csv::fmt(s.log_price[k]) << ','
                << csv::fmt(k == 0 ? 0.0 : s.returns[k - 1]) << '\n';
        }
    }
}

std::vector<TradingSession> read_sessions_csv(std::istream& in) {
    auto t = csv::read_table(in, "sessions CSV");
    const int c_date = t.require_column("date");
    const int c_ts = t.require_column("timestamp_ms");
    const int c_lp = t.require_column("log_price");

    std::vector<TradingSession> out;
    for (const auto& row : t.rows) {
        const Date d = Date::parse(row[c_date]);
        if (out.empty() || !(out.back().date == d)) {
            out.emplace_back();
            out.back().date = d;
        }
        out.back().grid_ms.push_back(csv::parse_int(row[c_ts]));
        out.back().log_price.push_back(csv::parse_double(row[c_lp]));
    }
    for (auto& s : out) {
        if (s.log_price.size() < 2) {
            throw DataError("sessions CSV: session " + s.date.to_string() +
                            " has fewer than 2 grid points");
        }
        s.returns.resize(s.log_price.size() - 1);
        for (std::size_t k = 1; k < s.log_price.size(); ++k) {
            s.returns[k - 1] = s.log_price[k] - s.log_price[k - 1];
        }
        s.open_close_return = s.log_price.back() - s.log_price.front();
    }
    return out;
}

void write_returns_csv(std::ostream& out, std::span<const TradingSession> sessions) {
    out << "date,return\n";
    for (const auto& s : sessions) {
        out << s.date.to_string() << ',' << csv::fmt(s.open_close_return) << '\n';
    }
}

}  // namespace fxvol::market
