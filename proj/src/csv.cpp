#include "gsr/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace gsr {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cell;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c == '\r' && i + 1 == line.size()) {
            // tolerate CRLF input
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string csv_escape(std::string_view cell) {
    const bool needs_quotes =
        cell.find_first_of(",\"\n") != std::string_view::npos ||
        (!cell.empty() && (cell.front() == ' ' || cell.back() == ' '));
    if (!needs_quotes) return std::string(cell);
    std::string out;
    out.reserve(cell.size() + 2);
    out.push_back('"');
    for (char c : cell) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join_csv(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out.push_back(',');
        out += csv_escape(cells[i]);
    }
    return out;
}

std::string format_fixed(double value, int precision) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("format_fixed: non-finite value");
    }
    // avoid "-0.00"
    if (value == 0.0) value = 0.0;
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, precision);
    if (res.ec != std::errc{}) {
        throw std::invalid_argument("format_fixed: value does not fit buffer");
    }
    return std::string(buf, res.ptr);
}

std::string format_shortest(double value) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("format_shortest: non-finite value");
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    if (res.ec != std::errc{}) {
        throw std::invalid_argument("format_shortest: value does not fit buffer");
    }
    return std::string(buf, res.ptr);
}

}  // namespace gsr
