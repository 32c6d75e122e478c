#pragma once
// Minimal RFC-4180 reader/writer plus exact decimal conversion for doubles.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace conspec::csv {

using Record = std::vector<std::string>;

struct Table {
  Record header;
  std::vector<Record> rows;
  // 1-based line number of each row in the source, for error messages.
  std::vector<std::size_t> lines;

  // Index of a header column, or npos.
  std::size_t column(std::string_view name) const;
};

Table parse(std::string_view text, const std::string& source_name = "<memory>");
Table read_file(const std::filesystem::path& path);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string quote(std::string_view field);
void write_record(std::ostream& out, const Record& record);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
// Strict parse of a full field; throws FormatError on junk or non-finite input.
double parse_double(std::string_view field, std::string_view context);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace conspec::csv
