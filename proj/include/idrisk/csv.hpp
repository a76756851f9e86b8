#ifndef IDRISK_CSV_HPP
#define IDRISK_CSV_HPP

#include <cstdio>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace idrisk {

// The project's file formats are plain comma-delimited text without quoting
// (no field in any format may contain a comma), so a split is all we need.
inline std::vector<std::string> split_csv_row(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

// Reads one line, stripping a trailing '\r' so CRLF files parse the same.
inline bool read_csv_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

// Fixed-notation double, used for metric columns in CSV tables.
inline std::string format_fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

// Shortest round-trip representation, used where exact re-parsing matters.
inline std::string format_exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace idrisk

#endif // IDRISK_CSV_HPP
