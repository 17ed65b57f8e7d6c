// io.hpp: CSV output and input for trajectories and sweep grids

#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lambqed/dynamics.hpp"
#include "lambqed/sweep.hpp"

namespace lambqed {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest text that round-trips the double exactly.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::logic_error("format_double: to_chars failed");
    return {buf, ptr};
}

inline double parse_double(std::string_view s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    }
    return v;
}

inline const char* units_comment() { return "# all quantities in units of omega (time in 1/omega)"; }

/// Columns: t, then one column per metric.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const std::vector<std::string>& channels,
                                 const std::string& title) {
    os << "# " << title << '\n' << units_comment() << '\n' << 't';
    for (const auto& c : channels) os << ',' << c;
    os << '\n';
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        os << format_double(tr.times[k]);
        for (const auto& c : channels) os << ',' << format_double(tr.observables.at(c)[k]);
        os << '\n';
    }
}

/// Columns: y axis, x axis, channel, flag. Rows in y-major order.
inline void write_grid_csv(std::ostream& os, const SweepGrid& grid, const std::string& channel, const std::string& title) {
    const auto& vals = grid.channel_values(channel);
    os << "# " << title << '\n' << units_comment() << '\n';
    os << "# flag bits: 1 integration_failed, 2 truncated, 4 not_converged, 8 no_steady_state\n";
    os << grid.y.name << ',' << grid.x.name << ',' << channel << ",flag\n";
    for (std::size_t iy = 0; iy < grid.y.size(); ++iy) {
        for (std::size_t ix = 0; ix < grid.x.size(); ++ix) {
            const std::size_t k = grid.index(ix, iy);
            os << format_double(grid.y.values[iy]) << ',' << format_double(grid.x.values[ix]) << ','
               << format_double(vals[k]) << ',' << static_cast<int>(grid.flags[k]) << '\n';
        }
    }
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

/// Reads a file written by write_grid_csv back into a one-channel grid.
inline SweepGrid read_grid_csv(std::istream& is) {
    std::string line;
    std::vector<std::string> header;
    struct Row {
        double y, x, v;
        int flag;
    };
    std::vector<Row> rows;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto cols = split(t, ',');
        if (header.empty()) {
            header = std::move(cols);
            if (header.size() != 4 || header[3] != "flag") {
                throw std::invalid_argument("read_grid_csv: expected header '<y>,<x>,<channel>,flag'");
            }
            continue;
        }
        if (cols.size() != 4) throw std::invalid_argument("read_grid_csv: line " + std::to_string(line_no) + " has " +
                                                          std::to_string(cols.size()) + " columns");
        rows.push_back({parse_double(cols[0]), parse_double(cols[1]), parse_double(cols[2]),
                        static_cast<int>(parse_double(cols[3]))});
    }
    if (header.empty()) throw std::invalid_argument("read_grid_csv: no header row");
    Axis y{header[0], {}}, x{header[1], {}};
    for (const auto& r : rows) {
        if (y.values.empty() || y.values.back() != r.y) y.values.push_back(r.y);
        if (y.values.size() == 1) x.values.push_back(r.x);
    }
    if (x.size() * y.size() != rows.size()) {
        throw std::invalid_argument("read_grid_csv: rows do not form a y-major rectangular grid");
    }
    SweepGrid grid(std::move(x), std::move(y), {header[2]});
    auto& vals = grid.values[header[2]];
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].x != grid.x.values[k % grid.x.size()]) {
            throw std::invalid_argument("read_grid_csv: x values differ between rows");
        }
        vals[k] = rows[k].v;
        grid.flags[k] = static_cast<std::uint8_t>(rows[k].flag);
    }
    return grid;
}

}  // namespace lambqed
