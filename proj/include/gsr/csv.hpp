#pragma once
// Small CSV helpers plus locale-independent number formatting.

#include <string>
#include <string_view>
#include <vector>

namespace gsr {

// Splits one CSV line into cells. Handles double-quoted cells with embedded
// commas and doubled quotes; does not handle embedded newlines.
std::vector<std::string> split_csv_line(std::string_view line);

// Quotes a cell when it contains a comma, quote, or leading/trailing space.
std::string csv_escape(std::string_view cell);

std::string join_csv(const std::vector<std::string>& cells);

// Fixed-precision formatting via std::to_chars: always a dot decimal
// separator, no grouping, independent of the global locale.
std::string format_fixed(double value, int precision);

// Shortest round-trip representation (snapshot/JSON-style numbers).
std::string format_shortest(double value);

}  // namespace gsr
