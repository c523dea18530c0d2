#pragma once

#include <string>
#include <vector>

namespace flowlab {

// Shortest round-trip decimal form (std::to_chars), locale independent.
std::string format_double(double value);

// Minimal CSV reader for the metrics files (no quoting, numeric cells).
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace flowlab
