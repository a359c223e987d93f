#pragma once

// Run orchestration: single runs, variant comparison and dispersion tables.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "filmsolve/config.hpp"
#include "filmsolve/diagnostics.hpp"
#include "filmsolve/integrator.hpp"
#include "filmsolve/io.hpp"
#include "filmsolve/version.hpp"

namespace filmsolve {

/// Initial state for a configuration. For cosine_h, q and Gamma sit at their
/// equilibrium values and S = phi_e h, i.e. chi = 0.
inline State build_initial_condition(const RunConfig& c, const Grid& grid) {
    const EquilibriumState e = equilibrium_state(c.params);
    switch (c.ic.kind) {
    case InitialKind::Equilibrium:
        return State::uniform(e, grid.n());
    case InitialKind::CosineH: {
        State st = State::uniform(e, grid.n());
        const double k = grid.wavenumber(c.ic.mode);
        for (int j = 0; j < grid.n(); ++j) st.h[j] = 1.0 + c.ic.amplitude * std::cos(k * grid.x()[j]);
        st.s = e.phi_e * st.h;
        return st;
    }
    default:
        return read_snapshot(c.ic.file, grid);
    }
}

inline int exit_code(RunStatus s) {
    switch (s) {
    case RunStatus::Completed: return 0;
    case RunStatus::BlowUp: return 2;
    default: return 3;
    }
}

/// Series row times: every sample interval inside (0, t_end), then t_end.
inline std::vector<double> sample_times(const RunConfig& c) {
    std::vector<double> out;
    const double dt = c.effective_sample_interval();
    if (c.t_end <= 0 || dt <= 0) return out;
    for (long k = 1;; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (t >= c.t_end * (1.0 - 1e-12)) break;
        out.push_back(t);
    }
    out.push_back(c.t_end);
    return out;
}

struct SimulationOutput {
    RunResult result;
    std::vector<SeriesRow> series;
};

/// Integrates one variant, recording a series row at t = 0, at every sample
/// time and at the final time. `snapshot_dir`, when set, receives a snapshot
/// file for each configured snapshot time.
inline SimulationOutput simulate(const RunConfig& c, Variant variant,
                                 const std::optional<std::filesystem::path>& snapshot_dir = {}) {
    validate_config(c);
    const Spectral ops(Grid(c.n, c.params.domain_length));
    const State initial = build_initial_condition(c, ops.grid());
    if (has_error(validate_state(initial, c.params)))
        throw Error("invalid-initial-state", "initial condition fails validation");
    const ImexStepper stepper(c.params, variant, ops);

    const double m0 = total_mass(initial, ops).m_total;
    SimulationOutput out;
    auto record = [&](double t, const State& st, double dt) {
        const MassReport m = total_mass(st, ops, t, m0);
        const RateReport r = mass_rate(st, c.params, variant, ops, t);
        const ExtremaReport e = track_extrema(st, t);
        out.series.push_back({t, m.m_bulk, m.m_surf, m.m_total, m.relative_drift, r.rate_bulk,
                              r.rate_surf, r.rate_total, e.gamma_min, e.gamma_max, e.h_min,
                              e.h_max, dt});
    };
    auto snapshot = [&](double t, const State& st) {
        if (snapshot_dir) write_snapshot(*snapshot_dir / snapshot_name(t), st, c.params, ops.grid());
    };

    const std::vector<double> samples = sample_times(c);
    std::vector<double> stops = samples;
    stops.insert(stops.end(), c.snapshot_times.begin(), c.snapshot_times.end());

    record(0.0, initial, 0.0);
    std::size_t next_snapshot = 0;
    while (next_snapshot < c.snapshot_times.size() && c.snapshot_times[next_snapshot] <= 0.0)
        snapshot(c.snapshot_times[next_snapshot++], initial);

    std::size_t next_sample = 0;
    auto observer = [&](double t, const State& st, double dt) {
        if (next_sample < samples.size() && t == samples[next_sample]) {
            record(t, st, dt);
            ++next_sample;
        }
        while (next_snapshot < c.snapshot_times.size() && t == c.snapshot_times[next_snapshot])
            snapshot(c.snapshot_times[next_snapshot++], st);
    };
    out.result = integrate_to(stepper, initial, 0.0, c.t_end, c.control, observer, stops);
    if (out.result.status != RunStatus::Completed && out.series.back().t < out.result.t)
        record(out.result.t, out.result.state, 0.0);
    return out;
}

namespace detail {

inline void write_series(const std::filesystem::path& path, const std::vector<SeriesRow>& rows) {
    auto out = open_output(path);
    out << kSeriesHeader << '\n';
    for (const auto& r : rows) out << r.csv() << '\n';
    if (!out) throw Error("io", "write failed for " + path.string());
}

inline void write_meta(const std::filesystem::path& path, const RunConfig& c,
                       const std::vector<std::pair<std::string, RunResult>>& results) {
    auto out = open_output(path);
    out << "# filmsolve " << kVersion << '\n'
        << "# resolved configuration (parseable)\n"
        << render_config(c)
        << "# initial condition: " << to_string(c.ic.kind);
    if (c.ic.kind == InitialKind::CosineH)
        out << " h = 1 + " << format_double(c.ic.amplitude) << " cos(2 pi " << c.ic.mode
            << " x / L), q and gamma at equilibrium, chi = 0";
    out << "\n# inclination: cot_theta = " << format_double(c.params.cot_theta) << '\n'
        << "# series stride: every " << format_double(c.effective_sample_interval())
        << " time units\n";
    for (const auto& [label, r] : results) {
        out << "# " << label << ": status = " << to_string(r.status) << ", t = "
            << format_double(r.t) << ", accepted = " << r.accepted << ", rejected = "
            << r.rejected << ", wall_seconds = " << format_double(r.wall_seconds);
        if (!r.message.empty()) out << ", message = " << r.message;
        out << '\n';
    }
}

inline unsigned thread_cap(unsigned wanted) {
    if (const char* env = std::getenv("FILMSOLVE_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap > 0) return std::min<unsigned>(wanted, static_cast<unsigned>(cap));
    }
    return wanted;
}

} // namespace detail

/// Runs the configured variant and writes series.csv, the snapshots and
/// run_meta.txt into `out_dir`. Returns the process exit code.
inline int run(const RunConfig& c, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("io", "cannot create " + out_dir.string() + ": " + ec.message());
    const SimulationOutput sim = simulate(c, c.variant, out_dir);
    detail::write_series(out_dir / "series.csv", sim.series);
    detail::write_meta(out_dir / "run_meta.txt", c, {{std::string(to_string(c.variant)), sim.result}});
    return exit_code(sim.result.status);
}

struct GrowthRow {
    int mode;
    double k;
    std::complex<double> legacy;
    std::complex<double> corrected;
};

inline std::vector<GrowthRow> growth_table(const ModelParams& p, int n, int max_mode) {
    const Spectral ops(Grid(n, p.domain_length));
    max_mode = std::min(max_mode, n / 2 - 1);
    std::vector<GrowthRow> rows;
    for (int m = 1; m <= max_mode; ++m)
        rows.push_back({m, ops.wavenumber(m), growth_rate(p, Variant::Legacy, ops, m),
                        growth_rate(p, Variant::Corrected, ops, m)});
    return rows;
}

inline void write_growth(std::ostream& out, const std::vector<GrowthRow>& rows) {
    out << "mode,k,re_legacy,im_legacy,re_corrected,im_corrected,abs_diff\n";
    for (const auto& r : rows)
        out << r.mode << ',' << format_g17(r.k) << ',' << format_g17(r.legacy.real()) << ','
            << format_g17(r.legacy.imag()) << ',' << format_g17(r.corrected.real()) << ','
            << format_g17(r.corrected.imag()) << ',' << format_g17(std::abs(r.legacy - r.corrected))
            << '\n';
}

inline constexpr const char* kCompareHeader =
    "t,rel_drift_legacy,rel_drift_corrected,rate_total_legacy,rate_total_corrected,"
    "gamma_min_legacy,gamma_max_legacy,gamma_min_corrected,gamma_max_corrected,h_max_legacy,"
    "h_max_corrected";

struct Comparison {
    SimulationOutput legacy;
    SimulationOutput corrected;
    std::vector<GrowthRow> growth;
};

/// Both variants from the same initial condition, optionally in parallel.
inline Comparison simulate_both(const RunConfig& c) {
    Comparison cmp;
    if (detail::thread_cap(2) >= 2) {
        auto legacy = std::async(std::launch::async, [&] { return simulate(c, Variant::Legacy); });
        cmp.corrected = simulate(c, Variant::Corrected);
        cmp.legacy = legacy.get();
    } else {
        cmp.legacy = simulate(c, Variant::Legacy);
        cmp.corrected = simulate(c, Variant::Corrected);
    }
    cmp.growth = growth_table(c.params, c.n, c.n / 2 - 1);
    return cmp;
}

/// Writes compare_series.csv, compare_growth.csv and compare_meta.txt.
/// Series rows are joined on the shared sample times; a variant that stopped
/// early leaves its cells empty.
inline int compare_variants(const RunConfig& c, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("io", "cannot create " + out_dir.string() + ": " + ec.message());
    const Comparison cmp = simulate_both(c);

    {
        auto out = open_output(out_dir / "compare_series.csv");
        out << kCompareHeader << '\n';
        const auto& L = cmp.legacy.series;
        const auto& C = cmp.corrected.series;
        std::size_t i = 0, j = 0;
        auto cell = [](const SeriesRow* r, double SeriesRow::*f) {
            return r ? format_g17(r->*f) : std::string();
        };
        while (i < L.size() || j < C.size()) {
            const SeriesRow* l = i < L.size() ? &L[i] : nullptr;
            const SeriesRow* r = j < C.size() ? &C[j] : nullptr;
            const double t = l && r ? std::min(l->t, r->t) : (l ? l->t : r->t);
            if (l && l->t != t) l = nullptr;
            if (r && r->t != t) r = nullptr;
            out << format_g17(t) << ',' << cell(l, &SeriesRow::rel_drift) << ','
                << cell(r, &SeriesRow::rel_drift) << ',' << cell(l, &SeriesRow::rate_total) << ','
                << cell(r, &SeriesRow::rate_total) << ',' << cell(l, &SeriesRow::gamma_min) << ','
                << cell(l, &SeriesRow::gamma_max) << ',' << cell(r, &SeriesRow::gamma_min) << ','
                << cell(r, &SeriesRow::gamma_max) << ',' << cell(l, &SeriesRow::h_max) << ','
                << cell(r, &SeriesRow::h_max) << '\n';
            if (l) ++i;
            if (r) ++j;
        }
    }
    {
        auto out = open_output(out_dir / "compare_growth.csv");
        write_growth(out, cmp.growth);
    }
    detail::write_meta(out_dir / "compare_meta.txt", c,
                       {{"legacy", cmp.legacy.result}, {"corrected", cmp.corrected.result}});
    return std::max(exit_code(cmp.legacy.result.status), exit_code(cmp.corrected.result.status));
}

} // namespace filmsolve
