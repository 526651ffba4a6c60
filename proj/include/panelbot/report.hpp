#pragma once

// Plain structured-text report tables (header + aligned columns) shared by the
// CLI and the mission summaries. Bodies are deterministic so diffs double as
// regression tests.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "panelbot/core.hpp"

namespace panelbot::report {

struct Table {
    std::string title;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

inline std::string cell(double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(int v) { return std::to_string(v); }

inline std::string render(const Table& t) {
    std::vector<std::size_t> width(t.columns.size(), 0);
    for (std::size_t c = 0; c < t.columns.size(); ++c) width[c] = t.columns[c].size();
    for (const auto& row : t.rows)
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c)
            width[c] = std::max(width[c], row[c].size());

    std::ostringstream out;
    if (!t.title.empty()) out << "# " << t.title << "\n";
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < width.size(); ++c) {
            const std::string& s = c < row.size() ? row[c] : std::string();
            out << s << std::string(width[c] - std::min(width[c], s.size()), ' ');
            out << (c + 1 < width.size() ? "  " : "");
        }
        out << "\n";
    };
    emit_row(t.columns);
    {
        std::vector<std::string> rule;
        for (std::size_t c = 0; c < width.size(); ++c) rule.push_back(std::string(width[c], '-'));
        emit_row(rule);
    }
    for (const auto& row : t.rows) emit_row(row);
    return out.str();
}

// Average/Median/Maximum/Minimum row in the recurring results layout.
inline std::vector<std::string> stats_row(const std::string& label, const Stats& s,
                                          int decimals = 3) {
    return {label, cell(s.average, decimals), cell(s.median, decimals), cell(s.max, decimals),
            cell(s.min, decimals)};
}

}  // namespace panelbot::report
