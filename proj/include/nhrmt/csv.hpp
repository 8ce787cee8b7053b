#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace nhrmt {

// Shortest representation that reads back to the same double; locale-free.
std::string format_double(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column, or -1.
    int column(const std::string& name) const;
    std::string to_string() const;
};

void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
// Plain comma-separated parsing (no quoting); throws IoError on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);
double parse_double(const std::string& field);

}  // namespace nhrmt
