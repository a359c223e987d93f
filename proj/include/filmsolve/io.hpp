#pragma once

// CSV serialization of time series and field snapshots. Numbers are written
// with 17 significant digits so doubles round-trip exactly.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "filmsolve/config.hpp"
#include "filmsolve/rhs.hpp"
#include "filmsolve/spectral.hpp"

namespace filmsolve {

inline constexpr const char* kSeriesHeader =
    "t,m_bulk,m_surf,m_total,rel_drift,rate_bulk,rate_surf,rate_total,gamma_min,gamma_max,"
    "h_min,h_max,dt";
inline constexpr const char* kSnapshotHeader = "x,h,q,gamma,phi,chi,s";

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// One row of series.csv.
struct SeriesRow {
    double t = 0.0;
    double m_bulk = 0.0;
    double m_surf = 0.0;
    double m_total = 0.0;
    double rel_drift = 0.0;
    double rate_bulk = 0.0;
    double rate_surf = 0.0;
    double rate_total = 0.0;
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double h_min = 0.0;
    double h_max = 0.0;
    double dt = 0.0;

    std::string csv() const {
        std::string out;
        for (double v : {t, m_bulk, m_surf, m_total, rel_drift, rate_bulk, rate_surf, rate_total,
                         gamma_min, gamma_max, h_min, h_max, dt}) {
            if (!out.empty()) out += ',';
            out += format_g17(v);
        }
        return out;
    }
};

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot open " + path.string() + " for writing");
    return out;
}

/// File name used for the snapshot at time t, e.g. snapshot_t500.csv.
inline std::string snapshot_name(double t) {
    return "snapshot_t" + detail::format_double(t) + ".csv";
}

inline void write_snapshot(const std::filesystem::path& path, const State& st,
                           const ModelParams& p, const Grid& grid) {
    const Closure cl = recover_closure(st, p);
    auto out = open_output(path);
    out << kSnapshotHeader << '\n';
    for (int j = 0; j < grid.n(); ++j) {
        out << format_g17(grid.x()[j]) << ',' << format_g17(st.h[j]) << ','
            << format_g17(st.q[j]) << ',' << format_g17(st.gamma[j]) << ','
            << format_g17(cl.phi[j]) << ',' << format_g17(cl.chi[j]) << ','
            << format_g17(st.s[j]) << '\n';
    }
    if (!out) throw Error("io", "write failed for " + path.string());
}

/// Reads a snapshot written by write_snapshot. The node count and x column
/// must match `grid`.
inline State read_snapshot(const std::filesystem::path& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw Error("file-not-found", path.string());
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kSnapshotHeader)
        throw Error("malformed-snapshot", path.string() + ": unexpected header");

    const int n = grid.n();
    State st{RealField(n), RealField(n), RealField(n), RealField(n)};
    int row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        if (row >= n)
            throw Error("malformed-snapshot", path.string() + ": more rows than grid nodes");
        std::istringstream cells(line);
        std::string cell;
        double v[7];
        int col = 0;
        while (std::getline(cells, cell, ',')) {
            if (col >= 7) break;
            v[col++] = detail::parse_double("snapshot", detail::trim(cell));
        }
        if (col != 7)
            throw Error("malformed-snapshot",
                        path.string() + ": row " + std::to_string(row + 1) + " needs 7 columns");
        if (std::abs(v[0] - grid.x()[row]) > 1e-9 * grid.length())
            throw Error("malformed-snapshot", path.string() + ": x column does not match grid");
        st.h[row] = v[1];
        st.q[row] = v[2];
        st.gamma[row] = v[3];
        st.s[row] = v[6];
        ++row;
    }
    if (row != n)
        throw Error("malformed-snapshot", path.string() + ": expected " + std::to_string(n) +
                                              " rows, found " + std::to_string(row));
    return st;
}

} // namespace filmsolve
