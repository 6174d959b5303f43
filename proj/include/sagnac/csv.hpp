// csv.hpp
// Minimal CSV helpers for the scan and report formats (no quoting needed).

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sagnac::csv {

inline std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) {
        // trim surrounding whitespace
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw std::runtime_error("missing CSV column: " + name);
    }
};

// Lines starting with '#' carry fit results and metrics; readers skip them.
inline Table read_stream(std::istream& in, const std::string& what) {
    Table t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty())
            t.header = split_row(line);
        else
            t.rows.push_back(split_row(line));
    }
    if (t.header.empty()) throw std::runtime_error("empty CSV " + what);
    return t;
}

inline Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path);
    return read_stream(in, "file: " + path);
}

inline Table read_string(const std::string& text) {
    std::istringstream in(text);
    return read_stream(in, "text");
}

}  // namespace sagnac::csv
