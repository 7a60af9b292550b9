#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fxvol::csv {

// Shortest round-trip decimal representation (std::to_chars).
std::string fmt(double v);

double parse_double(const std::string& field);
std::int64_t parse_int(const std::string& field);

std::vector<std::string> split(const std::string& line, char delim = ',');

// Strips a trailing '\r' (CRLF input) and a UTF-8 BOM on the first line.
bool getline_clean(std::istream& in, std::string& line, bool first = false);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
    int require_column(const std::string& name) const;
};

Table read_table(std::istream& in, const std::string& what);

}  // namespace fxvol::csv
