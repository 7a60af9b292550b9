#include "fxvol/csv.hpp"

#include <charconv>
#include <cstdint>
#include <istream>

#include "fxvol/common.hpp"

namespace fxvol::csv {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& field) {
    double v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw DataError("cannot parse number: '" + field + "'");
    }
    return v;
}

std::int64_t parse_int(const std::string& field) {
    std::int64_t v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw DataError("cannot parse integer: '" + field + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

bool getline_clean(std::istream& in, std::string& line, bool first) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB &&
        static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
    return true;
}

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

int Table::require_column(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw DataError("missing CSV column '" + name + "'");
    return c;
}

Table read_table(std::istream& in, const std::string& what) {
    Table t;
    std::string line;
    if (!getline_clean(in, line, true)) {
        throw DataError("cannot read " + what + ": empty or unreadable stream");
    }
    t.header = split(line);
    while (getline_clean(in, line)) {
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != t.header.size()) {
            throw DataError(what + ": row with " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    return t;
}

}  // namespace fxvol::csv
