#pragma once

// Run configuration: a flat key=value text format.
//
//   # comment
//   re = 1.5
//   snapshot_times = 100, 500
//
// Keys are the field names below. Unknown keys are errors, as are missing
// keys that have no default (every physical parameter and t_end).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "filmsolve/integrator.hpp"
#include "filmsolve/model.hpp"

namespace filmsolve {

enum class InitialKind { Equilibrium, CosineH, CustomFile };

inline std::string_view to_string(InitialKind k) {
    switch (k) {
    case InitialKind::Equilibrium: return "equilibrium";
    case InitialKind::CosineH: return "cosine_h";
    default: return "custom_file";
    }
}

struct InitialCondition {
    InitialKind kind = InitialKind::CosineH;
    double amplitude = 0.1;
    int mode = 1;
    std::string file;

    bool operator==(const InitialCondition&) const = default;
};

struct RunConfig {
    ModelParams params;
    Variant variant = Variant::Corrected;
    int n = 256;
    InitialCondition ic;
    double t_end = 0.0;
    std::vector<double> snapshot_times;
    /// Spacing of series rows; 0 means t_end / 200.
    double sample_interval = 0.0;
    std::string output_dir = ".";
    StepControl control;

    double effective_sample_interval() const {
        return sample_interval > 0 ? sample_interval : t_end / 200.0;
    }

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw Error("bad-value", "key '" + key + "' expects a number, got '" + text + "'");
    return v;
}

inline long parse_long(const std::string& key, const std::string& text) {
    long v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw Error("bad-value", "key '" + key + "' expects an integer, got '" + text + "'");
    return v;
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline const std::vector<std::string>& required_keys() {
    static const std::vector<std::string> keys = {
        "re",    "fr", "cot_theta", "pe_b",    "pe_s",          "eps",  "mr",
        "k_s",   "kappa", "gamma_e", "ka", "domain_length", "t_end"};
    return keys;
}

} // namespace detail

/// Throws Error("invalid-config", ...) on any violated constraint.
inline void validate_config(const RunConfig& c) {
    c.params.validate();
    c.control.validate();
    Grid(c.n, c.params.domain_length);
    if (!(c.t_end >= 0) || !std::isfinite(c.t_end))
        throw Error("invalid-config", "t_end must be >= 0");
    if (!std::is_sorted(c.snapshot_times.begin(), c.snapshot_times.end()))
        throw Error("invalid-config", "snapshot_times must be sorted ascending");
    for (double s : c.snapshot_times)
        if (s < 0 || s > c.t_end)
            throw Error("invalid-config", "snapshot time " + detail::format_double(s) +
                                              " lies outside [0, t_end]");
    if (c.sample_interval < 0) throw Error("invalid-config", "sample_interval must be >= 0");
    if (c.ic.kind == InitialKind::CosineH) {
        if (!(std::abs(c.ic.amplitude) < 1.0))
            throw Error("invalid-config", "amplitude must keep h positive (|amplitude| < 1)");
        if (c.ic.mode < 0) throw Error("invalid-config", "ic_mode must be >= 0");
    }
    if (c.ic.kind == InitialKind::CustomFile && c.ic.file.empty())
        throw Error("invalid-config", "ic_kind = custom_file requires ic_file");
}

inline RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw Error("malformed-line", "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        if (key.empty())
            throw Error("malformed-line", "line " + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second)
            throw Error("duplicate-key", "line " + std::to_string(lineno) + ": key '" + key +
                                             "' given twice");

        auto num = [&] { return detail::parse_double(key, value); };
        ModelParams& p = c.params;
        if (key == "re") p.re = num();
        else if (key == "fr") p.fr = num();
        else if (key == "cot_theta") p.cot_theta = num();
        else if (key == "pe_b") p.pe_b = num();
        else if (key == "pe_s") p.pe_s = num();
        else if (key == "eps") p.eps = num();
        else if (key == "mr") p.mr = num();
        else if (key == "k_s") p.k_s = num();
        else if (key == "kappa") p.kappa = num();
        else if (key == "gamma_e") p.gamma_e = num();
        else if (key == "ka") p.ka = num();
        else if (key == "domain_length") p.domain_length = num();
        else if (key == "legacy_source_mismatch") p.legacy_source_mismatch = num();
        else if (key == "bulk_diffusion") p.bulk_diffusion = parse_bulk_diffusion(value);
        else if (key == "variant") c.variant = parse_variant(value);
        else if (key == "n") c.n = static_cast<int>(detail::parse_long(key, value));
        else if (key == "ic_kind") {
            if (value == "equilibrium") c.ic.kind = InitialKind::Equilibrium;
            else if (value == "cosine_h") c.ic.kind = InitialKind::CosineH;
            else if (value == "custom_file") c.ic.kind = InitialKind::CustomFile;
            else throw Error("bad-value", "ic_kind must be equilibrium, cosine_h or custom_file");
        }
        else if (key == "ic_amplitude") c.ic.amplitude = num();
        else if (key == "ic_mode") c.ic.mode = static_cast<int>(detail::parse_long(key, value));
        else if (key == "ic_file") c.ic.file = value;
        else if (key == "t_end") c.t_end = num();
        else if (key == "snapshot_times") {
            c.snapshot_times.clear();
            std::istringstream list(value);
            std::string item;
            while (std::getline(list, item, ',')) {
                const std::string t = detail::trim(item);
                if (!t.empty()) c.snapshot_times.push_back(detail::parse_double(key, t));
            }
        }
        else if (key == "sample_interval") c.sample_interval = num();
        else if (key == "output_dir") c.output_dir = value;
        else if (key == "dt_init") c.control.dt_init = num();
        else if (key == "dt_min") c.control.dt_min = num();
        else if (key == "dt_max") c.control.dt_max = num();
        else if (key == "rel_tol") c.control.rel_tol = num();
        else if (key == "abs_tol") c.control.abs_tol = num();
        else if (key == "safety_factor") c.control.safety_factor = num();
        else if (key == "max_steps") c.control.max_steps = detail::parse_long(key, value);
        else
            throw Error("unknown-key", "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }

    std::vector<std::string> missing;
    for (const auto& k : detail::required_keys())
        if (!seen.count(k)) missing.push_back(k);
    if (!missing.empty()) {
        std::string list;
        for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
        throw Error("missing-keys", "required keys missing: " + list);
    }
    validate_config(c);
    return c;
}

/// Inverse of parse_config; every key is written.
inline std::string render_config(const RunConfig& c) {
    using detail::format_double;
    const ModelParams& p = c.params;
    std::ostringstream out;
    out << "re = " << format_double(p.re) << '\n'
        << "fr = " << format_double(p.fr) << '\n'
        << "cot_theta = " << format_double(p.cot_theta) << '\n'
        << "pe_b = " << format_double(p.pe_b) << '\n'
        << "pe_s = " << format_double(p.pe_s) << '\n'
        << "eps = " << format_double(p.eps) << '\n'
        << "mr = " << format_double(p.mr) << '\n'
        << "k_s = " << format_double(p.k_s) << '\n'
        << "kappa = " << format_double(p.kappa) << '\n'
        << "gamma_e = " << format_double(p.gamma_e) << '\n'
        << "ka = " << format_double(p.ka) << '\n'
        << "domain_length = " << format_double(p.domain_length) << '\n'
        << "legacy_source_mismatch = " << format_double(p.legacy_source_mismatch) << '\n'
        << "bulk_diffusion = " << to_string(p.bulk_diffusion) << '\n'
        << "variant = " << to_string(c.variant) << '\n'
        << "n = " << c.n << '\n'
        << "ic_kind = " << to_string(c.ic.kind) << '\n'
        << "ic_amplitude = " << format_double(c.ic.amplitude) << '\n'
        << "ic_mode = " << c.ic.mode << '\n';
    if (!c.ic.file.empty()) out << "ic_file = " << c.ic.file << '\n';
    out << "t_end = " << format_double(c.t_end) << '\n';
    out << "snapshot_times = ";
    for (std::size_t i = 0; i < c.snapshot_times.size(); ++i)
        out << (i ? ", " : "") << format_double(c.snapshot_times[i]);
    out << '\n'
        << "sample_interval = " << format_double(c.sample_interval) << '\n'
        << "output_dir = " << c.output_dir << '\n'
        << "dt_init = " << format_double(c.control.dt_init) << '\n'
        << "dt_min = " << format_double(c.control.dt_min) << '\n'
        << "dt_max = " << format_double(c.control.dt_max) << '\n'
        << "rel_tol = " << format_double(c.control.rel_tol) << '\n'
        << "abs_tol = " << format_double(c.control.abs_tol) << '\n'
        << "safety_factor = " << format_double(c.control.safety_factor) << '\n'
        << "max_steps = " << c.control.max_steps << '\n';
    return out.str();
}

} // namespace filmsolve
