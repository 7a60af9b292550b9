#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fxvol/common.hpp"

namespace fxvol::market {

struct Tick {
    std::int64_t ts_ms;  // UTC epoch milliseconds
    double price;
};

struct TickSeries {
    std::string instrument;
    std::vector<Tick> ticks;
    std::size_t total_rows = 0;
    std::size_t malformed_rows = 0;
};

// Sessions run from `open_minutes` wall-clock on the previous day to
// `close_minutes` on the label day (default 17:00 -> 16:00, a 23-hour
// session with the 16:00-17:00 maintenance break outside any session).
// Timezones are fixed UTC offsets ("UTC", "UTC-06:00", "UTC+01:30").
struct SessionCalendar {
    int open_minutes = 17 * 60;
    int close_minutes = 16 * 60;
    int utc_offset_minutes = 0;
    bool exclude_weekends = true;
    std::set<Date> excluded_dates;
    std::size_t min_ticks = 100;

    int session_minutes() const {
        const int len = (close_minutes - open_minutes + 1440) % 1440;
        return len == 0 ? 1440 : len;
    }
};

int parse_utc_offset(const std::string& tz);

// One trading day's raw ticks between the session boundaries.
struct SessionTicks {
    Date date;               // label = close date
    std::int64_t open_ms;    // UTC
    std::int64_t close_ms;   // UTC
    std::vector<Tick> ticks;
};

struct TradingSession {
    Date date;
    std::vector<std::int64_t> grid_ms;  // K+1 stamps
    std::vector<double> log_price;      // K+1 values
    std::vector<double> returns;        // K values
    double open_close_return = 0.0;

    int n() const { return static_cast<int>(returns.size()); }
};

struct ReturnStats {
    double mean = 0.0;
    double std_dev = 0.0;   // sample (n-1) standard deviation
    double skewness = 0.0;  // population third standardized moment
    double kurtosis = 0.0;  // raw fourth standardized moment (normal = 3)
};

// CSV schema: header "timestamp_ms,price". Malformed rows (bad field count,
// unparsable numbers, price <= 0) are counted; more than 1% malformed is a
// format error naming the first bad line.
TickSeries parse_ticks(std::istream& in, std::string instrument = {});

TickSeries dedup_same_timestamp(const TickSeries& t);

std::vector<SessionTicks> build_sessions(const TickSeries& t,
                                         const SessionCalendar& cal,
                                         std::vector<std::string>* warnings = nullptr);

// Previous-tick interpolation onto a regular grid aligned to the session
// open; a trailing partial interval is dropped. The first tick back-fills
// grid points before any tick exists.
TradingSession sample_grid(const SessionTicks& s, std::int64_t interval_ms);

ReturnStats summary_stats(std::span<const double> r);

void write_sessions_csv(std::ostream& out, std::span<const TradingSession> sessions);
std::vector<TradingSession> read_sessions_csv(std::istream& in);
void write_returns_csv(std::ostream& out, std::span<const TradingSession> sessions);

}  // namespace fxvol::market
