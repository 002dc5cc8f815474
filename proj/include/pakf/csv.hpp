#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pakf::csv {

/// Shortest-safe decimal form with 17 significant digits.
std::string number(double value);

std::vector<std::string> split(const std::string& line);

double parse_double(const std::string& field);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column, or -1.
    int column(const std::string& name) const;
};

/// Reads a header row plus data rows; throws std::runtime_error when the file
/// is missing or a row has the wrong field count.
Table read(const std::filesystem::path& path);

}  // namespace pakf::csv
