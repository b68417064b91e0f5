#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace quantsig::io {

using CsvRow = std::vector<std::string>;

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// newlines. Accepts LF or CRLF line ends; blank lines are dropped.
/// Each returned row carries its 1-based source line in `lines` when given.
std::vector<CsvRow> parse_csv(std::string_view text, std::vector<std::size_t>* lines = nullptr);

std::string csv_escape(std::string_view field);
std::string csv_line(const CsvRow& fields);

std::string trim(std::string_view s);

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary and renames into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

/// Fixed-point text with `digits` decimals, for human-facing tables.
std::string format_fixed(double value, int digits);

bool parse_real(std::string_view text, double& out);

}  // namespace quantsig::io
