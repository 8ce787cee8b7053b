#include "nhrmt/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nhrmt/errors.hpp"

namespace nhrmt {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& field) {
    if (field == "nan") return std::nan("");
    if (field == "inf") return INFINITY;
    if (field == "-inf") return -INFINITY;
    double v = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw IoError("not a number: '" + field + "'");
    return v;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {
void append_row(std::string& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += row[i];
    }
    out += '\n';
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}
}  // namespace

std::string CsvTable::to_string() const {
    std::string out;
    append_row(out, header);
    for (const auto& r : rows) append_row(out, r);
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw IoError("write failed: " + path.string());
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) { write_text_file(path, table.to_string()); }

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(f, line)) throw IoError(path.string() + ": empty file");
    t.header = split(line);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto row = split(line);
        if (row.size() != t.header.size())
            throw IoError(path.string() + ": row " + std::to_string(t.rows.size() + 1) + " has wrong field count");
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace nhrmt
