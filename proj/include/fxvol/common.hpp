#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fxvol {

// Error taxonomy. The CLI maps these onto distinct exit codes:
// ConfigError -> 2, DataError -> 3, NumericError -> 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Proleptic-Gregorian calendar date. Comparison on (y, m, d) is
// chronological, so the defaulted operators are enough.
struct Date {
    int y = 1970;
    int m = 1;
    int d = 1;

    static Date from_serial(std::int64_t days);
    static Date parse(const std::string& iso);  // "YYYY-MM-DD"

    std::int64_t serial() const;  // days since 1970-01-01
    int weekday() const;          // 0 = Sunday .. 6 = Saturday
    bool is_weekend() const;
    Date next_day() const;
    std::string to_string() const;

    auto operator<=>(const Date&) const = default;
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fxvol
