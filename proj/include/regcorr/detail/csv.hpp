#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace regcorr::detail {

// Minimal CSV support for the project's column formats. No quoting; fields
// may not contain commas.

std::vector<std::string> split_csv_line(const std::string& line);

// Reads all non-empty lines. Throws FormatError (offset = line number) on
// I/O failure.
std::vector<std::string> read_text_lines(const std::string& path);

double parse_double_field(const std::string& field, const std::string& context, std::uint64_t line_no);
long long parse_int_field(const std::string& field, const std::string& context, std::uint64_t line_no);
std::uint64_t parse_uint_field(const std::string& field, const std::string& context, std::uint64_t line_no);

// Shortest decimal representation that round-trips a double exactly.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace regcorr::detail
