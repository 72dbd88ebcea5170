#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gridfit {

/// Rectangular CSV table: one header row, numeric cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t cols() const noexcept { return header.size(); }
};

/// Shortest round-trip decimal representation of a double ('.' decimal point,
/// locale independent).
std::string format_double(double v);

/// Writes comma-separated, LF-terminated rows. Values keep full precision.
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Parses a numeric CSV. Throws ParseError with the offending 1-based line
/// number on malformed cells or ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gridfit
