#pragma once

#include <string>
#include <vector>

namespace ninlab {

// Shortest round-trippable decimal representation; "nan"/"inf" for
// non-finite values. All CSV output goes through this so repeated runs are
// byte-identical.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by name; throws FormatError naming the column if absent.
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
    double cell_as_double(std::size_t row, std::size_t col) const;
    std::vector<double> column_as_doubles(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

} // namespace ninlab
