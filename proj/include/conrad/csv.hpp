#pragma once

#include <array>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "conrad/error.hpp"

namespace conrad::csv {

/// Unquoted comma-separated rows; blank lines are skipped and CR is stripped.
inline std::vector<std::vector<std::string>> parse(std::string_view text, const std::string& where) {
    std::vector<std::vector<std::string>> rows;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line.find('"') != std::string_view::npos) throw Error(ErrorKind::InvalidInput, where + ": quoted fields are not supported");
        std::vector<std::string> fields;
        std::size_t f = 0;
        while (true) {
            const std::size_t comma = line.find(',', f);
            fields.emplace_back(line.substr(f, comma == std::string_view::npos ? std::string_view::npos : comma - f));
            if (comma == std::string_view::npos) break;
            f = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

inline double parse_double(std::string_view s, const std::string& where, std::size_t line) {
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw Error(ErrorKind::InvalidInput, where + ": line " + std::to_string(line) + ": '" + std::string(s) + "' is not a number");
    }
    return v;
}

/// Shortest representation that round-trips.
inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace conrad::csv
