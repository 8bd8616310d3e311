#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pathfinder {

using CsvRow = std::vector<std::string>;

/// RFC 4180: comma separated, CRLF or LF line ends, fields optionally
/// double-quoted with "" as an embedded quote. Quoted fields may span lines.
/// A trailing newline does not produce an empty row. Throws parse_error on
/// an unterminated quote or stray quote inside an unquoted field.
std::vector<CsvRow> parse_csv(std::string_view text);

/// Quotes the field when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view field);

std::string csv_line(const CsvRow& fields);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so the
/// target never holds partial content. Throws io_error.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace pathfinder
