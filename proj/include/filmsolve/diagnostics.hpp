#pragma once

// Surfactant mass bookkeeping, flux decomposition, extrema tracking and the
// linear-stability probe.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "filmsolve/model.hpp"
#include "filmsolve/rhs.hpp"
#include "filmsolve/spectral.hpp"

namespace filmsolve {

struct MassReport {
    double t = 0.0;
    double m_bulk = 0.0;   // integral of S = phi h + chi
    double m_surf = 0.0;   // integral of Gamma
    double m_total = 0.0;
    double drift = 0.0;    // m_total - reference
    double relative_drift = 0.0;
};

struct RateReport {
    double t = 0.0;
    double rate_bulk = 0.0;
    double rate_surf = 0.0;
    double rate_total = 0.0;
};

struct ExtremaReport {
    double t = 0.0;
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double h_min = 0.0;
    double h_max = 0.0;
};

/// Masses at time t. Drift is measured against `reference` (the initial
/// total) when given; relative drift divides by |reference| unless it is 0.
inline MassReport total_mass(const State& st, const Spectral& ops, double t = 0.0,
                             std::optional<double> reference = std::nullopt) {
    MassReport m;
    m.t = t;
    m.m_bulk = ops.integrate(st.s);
    m.m_surf = ops.integrate(st.gamma);
    m.m_total = m.m_bulk + m.m_surf;
    if (reference) {
        m.drift = m.m_total - *reference;
        m.relative_drift = *reference != 0.0 ? m.drift / std::abs(*reference) : m.drift;
    }
    return m;
}

inline RateReport mass_rate(const Tendency& f, const Spectral& ops, double t = 0.0) {
    RateReport r;
    r.t = t;
    r.rate_bulk = ops.integrate(f.ds_dt);
    r.rate_surf = ops.integrate(f.dgamma_dt);
    r.rate_total = r.rate_bulk + r.rate_surf;
    return r;
}

/// Domain integrals of dS/dt and dGamma/dt.
inline RateReport mass_rate(const State& st, const ModelParams& p, Variant v, const Spectral& ops,
                            double t = 0.0) {
    return mass_rate(eval_rhs(st, p, v, ops).tendency, ops, t);
}

/// Closed-form instantaneous drift of the Legacy variant:
/// (c - 1)/4 eps Re Mr integral(Gamma Gamma_x h_x), with c - 1 = 4.
inline double legacy_drift_rate(const State& st, const ModelParams& p, const Spectral& ops) {
    const RealField gx = ops.deriv(st.gamma, 1);
    const RealField hx = ops.deriv(st.h, 1);
    const double c = coupling_multiplier(Variant::Legacy);
    return 0.25 * (c - 1.0) * p.eps * p.re * p.mr * ops.integrate(st.gamma * gx * hx);
}

struct FluxTerm {
    std::string name;
    double value;
};

struct FluxDecomposition {
    std::vector<FluxTerm> bulk;     // advective, diffusive, marangoni, source
    std::vector<FluxTerm> surface;  // same order

    double bulk_sum() const { return sum(bulk); }
    double surface_sum() const { return sum(surface); }

    double value(const std::string& name) const {
        for (const auto* list : {&bulk, &surface})
            for (const auto& term : *list)
                if (term.name == name) return term.value;
        throw Error("unknown-term", name);
    }

private:
    static double sum(const std::vector<FluxTerm>& v) {
        double s = 0.0;
        for (const auto& t : v) s += t.value;
        return s;
    }
};

inline FluxDecomposition flux_decomposition(const RhsBreakdown& b, const Spectral& ops) {
    auto integrate_groups = [&](const RhsBreakdown::Surfactant& g, const std::string& prefix) {
        return std::vector<FluxTerm>{{prefix + "advective", ops.integrate(g.advective)},
                                     {prefix + "diffusive", ops.integrate(g.diffusive)},
                                     {prefix + "marangoni", ops.integrate(g.marangoni)},
                                     {prefix + "source", ops.integrate(g.source)}};
    };
    return {integrate_groups(b.bulk, "bulk_"), integrate_groups(b.surface, "surface_")};
}

inline FluxDecomposition flux_decomposition(const State& st, const ModelParams& p, Variant v,
                                            const Spectral& ops) {
    return flux_decomposition(eval_rhs(st, p, v, ops).breakdown, ops);
}

inline ExtremaReport track_extrema(const State& st, double t = 0.0) {
    return {t, st.gamma.minCoeff(), st.gamma.maxCoeff(), st.h.minCoeff(), st.h.maxCoeff()};
}

// ---------------------------------------------------------------------------
// Linear stability
// ---------------------------------------------------------------------------

using ModeMatrix = Eigen::Matrix4cd;

/// Complex 4x4 symbol A(k_m) of the RHS linearized about the uniform
/// equilibrium, field order (h, q, S, Gamma).
///
/// Column j comes from central differences of the tendencies under
/// perturbations delta*cos(k x) and delta*sin(k x) of field j. For a real
/// translation-invariant operator the e^{ikx} coefficient of the response
/// is A/2 for the cosine and A/(2i) for the sine; the two estimates are
/// averaged.
inline ModeMatrix linear_block(const ModelParams& p, Variant v, const Spectral& ops, int mode,
                               double delta = 1e-7) {
    if (mode < 1 || mode > ops.n() / 2 - 1)
        throw Error("bad-mode", "mode index must lie in [1, n/2 - 1]");
    const EquilibriumState e = equilibrium_state(p);
    const State base = State::uniform(e, ops.n());
    const double k = ops.wavenumber(mode);
    const RealField cosine = ops.sample([k](double x) { return std::cos(k * x); });
    const RealField sine = ops.sample([k](double x) { return std::sin(k * x); });

    auto field = [](State& s, int j) -> RealField& {
        switch (j) {
        case 0: return s.h;
        case 1: return s.q;
        case 2: return s.s;
        default: return s.gamma;
        }
    };
    auto tendency = [](const Tendency& t, int i) -> const RealField& {
        switch (i) {
        case 0: return t.dh_dt;
        case 1: return t.dq_dt;
        case 2: return t.ds_dt;
        default: return t.dgamma_dt;
        }
    };
    auto response = [&](int j, const RealField& shape) {
        State plus = base, minus = base;
        field(plus, j) += delta * shape;
        field(minus, j) -= delta * shape;
        const Tendency fp = eval_rhs(plus, p, v, ops).tendency;
        const Tendency fm = eval_rhs(minus, p, v, ops).tendency;
        Eigen::Vector4cd col;
        for (int i = 0; i < 4; ++i) {
            const RealField d = (tendency(fp, i) - tendency(fm, i)) / (2.0 * delta);
            col[i] = ops.forward(d)[mode];
        }
        return col;
    };

    ModeMatrix a;
    const std::complex<double> i_unit(0.0, 1.0);
    for (int j = 0; j < 4; ++j) {
        const Eigen::Vector4cd from_cos = 2.0 * response(j, cosine);
        const Eigen::Vector4cd from_sin = 2.0 * i_unit * response(j, sine);
        a.col(j) = 0.5 * (from_cos + from_sin);
    }
    return a;
}

struct GrowthRate {
    std::complex<double> lambda;     // eigenvalue with largest real part
    Eigen::Vector4cd eigenvector;    // matching eigenvector (h, q, S, Gamma)
};

inline GrowthRate leading_eigenpair(const ModeMatrix& a) {
    Eigen::ComplexEigenSolver<ModeMatrix> solver(a);
    if (solver.info() != Eigen::Success) throw Error("eigen", "eigenvalue solve failed");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < 4; ++i)
        if (solver.eigenvalues()[i].real() > solver.eigenvalues()[best].real()) best = i;
    return {solver.eigenvalues()[best], solver.eigenvectors().col(best)};
}

/// Most unstable temporal eigenvalue of Fourier mode `mode`.
inline std::complex<double> growth_rate(const ModelParams& p, Variant v, const Spectral& ops,
                                        int mode) {
    return leading_eigenpair(linear_block(p, v, ops, mode)).lambda;
}

} // namespace filmsolve
