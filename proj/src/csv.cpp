#include "efc/csv.hpp"

#include <fstream>

#include "efc/errors.hpp"

namespace efc {

std::string trim(const std::string& s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path.string());

    CsvTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (table.header.empty()) {
            table.header = split_csv_line(line);
            table.header_line = line_no;
        } else {
            table.rows.push_back(CsvRow{line_no, split_csv_line(line)});
        }
    }
    if (table.header.empty()) throw DataError("empty file: " + path.string());
    return table;
}

int column_index(const CsvTable& table, const std::string& name) {
    for (size_t i = 0; i < table.header.size(); ++i) {
        if (table.header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

}  // namespace efc
