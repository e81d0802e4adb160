#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace efc {

/// Minimal CSV support: comma-separated, no quoting (market data files in
/// this project never quote fields). Line numbers are physical file lines,
/// 1-based, so error messages point at the offending row.
struct CsvRow {
    int line = 0;
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    int header_line = 0;
    std::vector<CsvRow> rows;
};

std::string trim(const std::string& s);
std::vector<std::string> split_csv_line(const std::string& line);

/// Reads a CSV file with a header row. Blank lines are kept out of rows but
/// still advance the line counter.
CsvTable read_csv(const std::filesystem::path& path);

/// Index of a named header column, or -1.
int column_index(const CsvTable& table, const std::string& name);

}  // namespace efc
