#include "gridfit/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "gridfit/errors.hpp"

namespace gridfit {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
    return std::string(buf, ptr);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c) out << ',';
        out << table.header[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_double(row[c]);
        }
        out << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path.string());
}

namespace {

double parse_cell(const std::string& cell, std::size_t line_no) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    // tolerate surrounding spaces
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("malformed numeric cell '" + cell + "'", line_no);
    return v;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for reading: " + path.string());

    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (line_no == 1) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size())
            throw ParseError("expected " + std::to_string(table.header.size()) +
                                 " columns, got " + std::to_string(cells.size()),
                             line_no);
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells) row.push_back(parse_cell(cell, line_no));
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw ParseError("empty file: " + path.string(), 1);
    return table;
}

}  // namespace gridfit
