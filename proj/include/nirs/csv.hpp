#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nirs::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC-4180-ish reader: comma separated, double-quoted fields may contain
/// commas, quotes ("") and newlines. Blank trailing lines are ignored.
Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

/// Quotes a field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

/// Shortest text that round-trips to the same double.
std::string format_double(double v);
/// Fixed 17-significant-digit text ("%.17g").
std::string format_double17(double v);
/// Fixed decimals, e.g. format_fixed(0.8181, 3) == "0.818".
std::string format_fixed(double v, int decimals);

/// Strict whole-token parse; false on empty, trailing garbage or overflow.
bool parse_double(std::string_view text, double& out);

}  // namespace nirs::csv
