#pragma once

#include <charconv>
#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "nmr/errors.hpp"

namespace nmr::csv {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool try_parse(std::string_view tok, double& out) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size() && !tok.empty();
}

inline bool try_parse(std::string_view tok, long long& out) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size() && !tok.empty();
}

inline double parse_double(std::string_view tok, std::size_t line) {
    double v = 0.0;
    if (!try_parse(tok, v)) throw ParseError("expected a number, got '" + std::string(tok) + "'", line);
    return v;
}

inline long long parse_int(std::string_view tok, std::size_t line) {
    long long v = 0;
    if (!try_parse(tok, v)) throw ParseError("expected an integer, got '" + std::string(tok) + "'", line);
    return v;
}

/// One non-blank, non-comment line with its 1-based line number.
struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Reads all data rows; blank lines and lines starting with '#' are skipped.
/// A leading row whose first field is not numeric is treated as a header and dropped.
inline std::vector<Row> read_rows(std::istream& is, bool allow_header = true) {
    std::vector<Row> rows;
    std::string text;
    std::size_t lineno = 0;
    while (std::getline(is, text)) {
        ++lineno;
        const auto t = trim(text);
        if (t.empty() || t.front() == '#') continue;
        Row row{lineno, {}};
        for (auto f : split(t)) row.fields.emplace_back(f);
        if (allow_header && rows.empty()) {
            double probe = 0.0;
            if (!try_parse(row.fields.front(), probe)) {
                allow_header = false;
                continue;
            }
        }
        allow_header = false;
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Numeric rows with a fixed column count.
inline std::vector<std::vector<double>> read_numeric(std::istream& is, std::size_t columns) {
    std::vector<std::vector<double>> out;
    for (const auto& row : read_rows(is)) {
        if (row.fields.size() != columns)
            throw ParseError("expected " + std::to_string(columns) + " columns, got " +
                                 std::to_string(row.fields.size()),
                             row.line);
        std::vector<double> vals;
        vals.reserve(columns);
        for (const auto& f : row.fields) vals.push_back(parse_double(f, row.line));
        out.push_back(std::move(vals));
    }
    return out;
}

}  // namespace nmr::csv
