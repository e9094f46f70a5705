#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cxr::pipeline {

using CsvRow = std::vector<std::string>;

/// RFC 4180 records: comma separated, fields optionally double-quoted with
/// "" escaping a quote. Blank lines are skipped.
std::vector<CsvRow> parse_csv(std::string_view text);
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

/// Quotes a field only when it contains a comma, quote, or line break.
std::string csv_field(std::string_view value);
std::string csv_line(const CsvRow& row);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

} // namespace cxr::pipeline
