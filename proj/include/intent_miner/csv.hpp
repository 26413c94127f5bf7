#pragma once

#include <string>
#include <vector>

namespace im::csv {

// RFC-4180 rows: comma-separated, double-quote quoting, "" escapes a quote,
// quoted fields may contain newlines. Accepts \n and \r\n row endings.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // 1-based physical line on which each data row starts (for error reports)
    std::vector<long> row_lines;
};

Table parse(const std::string& content);
Table parse_file(const std::string& path);

std::string escape(const std::string& field);
std::string to_line(const std::vector<std::string>& fields);

}  // namespace im::csv
