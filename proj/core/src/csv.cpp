#include "ninlab/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ninlab/common.hpp"

namespace ninlab {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    // Find the shortest precision that round-trips.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw FormatError("csv: missing column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
    for (const auto& h : header)
        if (h == name) return true;
    return false;
}

double CsvTable::cell_as_double(std::size_t row, std::size_t col) const {
    const std::string& s = rows[row][col];
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw FormatError("csv: non-numeric cell '" + s + "'");
    return v;
}

std::vector<double> CsvTable::column_as_doubles(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(cell_as_double(r, c));
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("csv: cannot open " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != t.header.size())
                throw FormatError("csv: row with " + std::to_string(fields.size()) +
                                  " fields, header has " + std::to_string(t.header.size()));
            t.rows.push_back(std::move(fields));
        }
    }
    if (first) throw FormatError("csv: empty file " + path);
    return t;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("short write to " + path);
}

} // namespace ninlab
