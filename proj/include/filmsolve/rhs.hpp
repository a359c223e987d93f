#pragma once

// Time derivative of the four-field reduced model (h, q, S, Gamma).
//
//   h_t = -q_x
//   q_t = momentum balance with inertia, hydrostatic, capillary, relaxation,
//         streamwise-viscous and Marangoni contributions
//   S_t = bulk surfactant balance, S = chi + phi h
//   Gamma_t = surface surfactant balance
//
// Every flux is assembled pointwise, passed through the 2/3-rule filter and
// differentiated once, so divergence terms integrate to zero to round-off.

#include <string>
#include <utility>
#include <vector>

#include "filmsolve/model.hpp"
#include "filmsolve/spectral.hpp"

namespace filmsolve {

struct State {
    RealField h;
    RealField q;
    RealField s;
    RealField gamma;

    /// Spatially uniform state at the model's fixed point.
    static State uniform(const EquilibriumState& e, int n) {
        return {RealField::Constant(n, e.h_e), RealField::Constant(n, e.q_e),
                RealField::Constant(n, e.s_e()), RealField::Constant(n, e.gamma_eq)};
    }

    bool operator==(const State& o) const {
        return h.size() == o.h.size() && (h == o.h).all() && (q == o.q).all() &&
               (s == o.s).all() && (gamma == o.gamma).all();
    }
};

/// Same layout as State, holding time derivatives.
struct Tendency {
    RealField dh_dt;
    RealField dq_dt;
    RealField ds_dt;
    RealField dgamma_dt;
};

using NamedField = std::pair<std::string, const RealField*>;

/// Term groups of each equation. Within an equation the groups sum to the
/// tendency.
struct RhsBreakdown {
    struct Thickness {
        RealField advective;
    } thickness;

    struct Momentum {
        RealField inertia;       // -(9/7 q^2/h)_x + (1/7)(q/h) q_x
        RealField hydrostatic;   // -(5/12 cot/Fr^2 h^2)_x
        RealField capillary;     // (5/6)(Ka/Re) h h_xxx
        RealField relaxation;    // (5/(2 eps Re)) [(1/3)(Re/Fr^2) h - q/h^2]
        RealField viscous;       // (eps/Re) [...]
        RealField marangoni;     // -(5/4) Mr Gamma_x + (eps Re Mr/16) [...]
    } momentum;

    // Bulk and surface balances share one layout so their groups can be
    // compared side by side.
    struct Surfactant {
        RealField advective;
        RealField diffusive;
        RealField marangoni;
        RealField source;
    };
    Surfactant bulk;
    Surfactant surface;

    std::vector<NamedField> named() const {
        return {{"thickness.advective", &thickness.advective},
                {"momentum.inertia", &momentum.inertia},
                {"momentum.hydrostatic", &momentum.hydrostatic},
                {"momentum.capillary", &momentum.capillary},
                {"momentum.relaxation", &momentum.relaxation},
                {"momentum.viscous", &momentum.viscous},
                {"momentum.marangoni", &momentum.marangoni},
                {"bulk.advective", &bulk.advective},
                {"bulk.diffusive", &bulk.diffusive},
                {"bulk.marangoni", &bulk.marangoni},
                {"bulk.source", &bulk.source},
                {"surface.advective", &surface.advective},
                {"surface.diffusive", &surface.diffusive},
                {"surface.marangoni", &surface.marangoni},
                {"surface.source", &surface.source}};
    }
};

struct RhsResult {
    Tendency tendency;
    RhsBreakdown breakdown;
};

/// Bulk closure fields recovered from a state.
struct Closure {
    RealField phi;
    RealField chi;
};

inline Closure recover_closure(const State& st, const ModelParams& p) {
    const Eigen::Index n = st.h.size();
    Closure c{RealField(n), RealField(n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        c.phi[j] = recover_phi(st.s[j], st.h[j], st.gamma[j], p);
        c.chi[j] = chi_closure(st.h[j], st.gamma[j], c.phi[j], p);
    }
    return c;
}

/// Gamma_xx Gamma h + Gamma_x^2 h + c Gamma Gamma_x h_x, expanded pointwise.
/// For c = 1 this is d/dx (h Gamma Gamma_x).
inline RealField marangoni_bracket_gamma(const RealField& h, const RealField& gamma,
                                         const Spectral& ops, double c) {
    const RealField hx = ops.deriv(h, 1);
    const RealField gx = ops.deriv(gamma, 1);
    const RealField gxx = ops.deriv(gamma, 2);
    return gxx * gamma * h + gx * gx * h + c * gamma * gx * hx;
}

struct StateIssue {
    enum class Severity { Warning, Error };
    Severity severity;
    std::string code;
    std::string message;
};

/// Errors for non-finite entries or h <= 0; warnings for Gamma outside [0, 1]
/// or phi < 0. Gamma is never clipped.
inline std::vector<StateIssue> validate_state(const State& st, const ModelParams& p) {
    using Sev = StateIssue::Severity;
    std::vector<StateIssue> issues;
    const Eigen::Index n = st.h.size();
    if (st.q.size() != n || st.s.size() != n || st.gamma.size() != n) {
        issues.push_back({Sev::Error, "size-mismatch", "state fields differ in length"});
        return issues;
    }
    const std::pair<const char*, const RealField*> fields[] = {
        {"h", &st.h}, {"q", &st.q}, {"s", &st.s}, {"gamma", &st.gamma}};
    for (const auto& [name, f] : fields)
        if (!f->allFinite())
            issues.push_back({Sev::Error, "non-finite", std::string(name) + " has non-finite entries"});
    if (!issues.empty()) return issues;

    if ((st.h <= 0.0).any()) {
        issues.push_back({Sev::Error, "nonpositive-thickness",
                          "min h = " + std::to_string(st.h.minCoeff())});
        return issues;
    }
    if ((st.gamma < 0.0).any() || (st.gamma > 1.0).any())
        issues.push_back({Sev::Warning, "gamma-out-of-range",
                          "gamma spans [" + std::to_string(st.gamma.minCoeff()) + ", " +
                              std::to_string(st.gamma.maxCoeff()) + "]"});
    try {
        const Closure c = recover_closure(st, p);
        if ((c.phi < 0.0).any())
            issues.push_back({Sev::Warning, "phi-negative",
                              "min phi = " + std::to_string(c.phi.minCoeff())});
    } catch (const Error& e) {
        issues.push_back({Sev::Error, e.code(), e.what()});
    }
    return issues;
}

inline bool has_error(const std::vector<StateIssue>& issues) {
    for (const auto& i : issues)
        if (i.severity == StateIssue::Severity::Error) return true;
    return false;
}

namespace detail {

inline void require_finite(const RealField& f, const char* group) {
    if (!f.allFinite())
        throw Error("non-finite", std::string("non-finite values in term group ") + group);
}

// d/dx of the 2/3-filtered flux, with one forward and one inverse transform.
inline RealField divergence(const RealField& flux, const Spectral& ops) {
    if (ops.backend() == DerivBackend::FiniteDifference4) return ops.deriv(ops.dealias(flux), 1);
    ComplexSpectrum c = ops.forward(flux);
    ops.truncate(c);
    return ops.backward(ops.deriv_spectrum(c, 1));
}

} // namespace detail

/// Evaluates all four tendencies and their term groups.
///
/// The surface balance is evaluated first; its x-derivative supplies the
/// mixed Gamma_tx term of the momentum equation.
inline RhsResult eval_rhs(const State& st, const ModelParams& p, Variant variant,
                          const Spectral& ops) {
    const Eigen::Index n = ops.n();
    if (st.h.size() != n || st.q.size() != n || st.s.size() != n || st.gamma.size() != n)
        throw Error("size-mismatch", "state does not match grid");
    if (!st.h.allFinite() || !st.q.allFinite() || !st.s.allFinite() || !st.gamma.allFinite())
        throw Error("non-finite", "state contains non-finite values");
    if ((st.h <= 0.0).any())
        throw Error("nonpositive-thickness", "min h = " + std::to_string(st.h.minCoeff()));

    using detail::divergence;
    using detail::require_finite;

    const RealField& h = st.h;
    const RealField& q = st.q;
    const RealField& g = st.gamma;
    const Closure cl = recover_closure(st, p);
    const RealField& phi = cl.phi;
    const RealField& chi = cl.chi;

    const auto [hx, hxx, hxxx] = ops.derivs123(h);
    const RealField qx = ops.deriv(q, 1);
    const RealField qxx = ops.deriv(q, 2);
    const RealField gx = ops.deriv(g, 1);
    const RealField gxx = ops.deriv(g, 2);
    const RealField chix = ops.deriv(chi, 1);

    const double eps = p.eps;
    const double marangoni = eps * p.re * p.mr;
    const double c = coupling_multiplier(variant);

    RhsResult r;
    auto& b = r.breakdown;

    b.thickness.advective = -qx;

    // Adsorption: one quantity, added to the surface and removed from the bulk.
    const RealField exchange = ops.dealias(3.0 * chi / (eps * p.pe_b * h * h));
    require_finite(exchange, "source");
    const double surface_scale = variant == Variant::Legacy ? p.legacy_source_mismatch : 1.0;

    // Surface surfactant.
    b.surface.advective = -1.5 * divergence(q * g / h, ops);
    b.surface.diffusive = (eps / p.pe_s) * gxx;
    b.surface.source = surface_scale == 1.0 ? exchange : RealField(surface_scale * exchange);
    b.surface.marangoni = divergence(h * g * gx, ops);
    if (c != 1.0) b.surface.marangoni += (c - 1.0) * ops.dealias(g * gx * hx);
    b.surface.marangoni *= 0.25 * marangoni;
    require_finite(b.surface.advective, "surface.advective");
    require_finite(b.surface.marangoni, "surface.marangoni");

    // Bulk surfactant.
    b.bulk.advective = -divergence((33.0 / 40.0) * q * chi / h + phi * q, ops);
    if (p.bulk_diffusion == BulkDiffusion::Conservative) {
        const RealField phix = ops.deriv(phi, 1);
        b.bulk.diffusive = (eps / p.pe_b) * divergence(chix + h * phix, ops);
    } else {
        const RealField chixx = ops.deriv(chi, 2);
        const RealField phixx = ops.deriv(phi, 2);
        b.bulk.diffusive =
            (eps / p.pe_b) * ops.dealias(chixx - 3.0 * chi * hx * hx / (h * h) + h * phixx);
    }
    b.bulk.source = -exchange;
    b.bulk.marangoni = -(3.0 / 80.0) * marangoni * divergence(h * chi * gx, ops);
    require_finite(b.bulk.advective, "bulk.advective");
    require_finite(b.bulk.diffusive, "bulk.diffusive");
    require_finite(b.bulk.marangoni, "bulk.marangoni");

    r.tendency.dh_dt = b.thickness.advective;
    r.tendency.dgamma_dt =
        b.surface.advective + b.surface.diffusive + b.surface.source + b.surface.marangoni;
    r.tendency.ds_dt = b.bulk.advective + b.bulk.diffusive + b.bulk.source + b.bulk.marangoni;

    // Momentum.
    const RealField q_over_h = q / h;
    b.momentum.inertia = -divergence((9.0 / 7.0) * q * q_over_h, ops) +
                         ops.dealias((1.0 / 7.0) * q_over_h * qx);
    b.momentum.hydrostatic =
        -divergence((5.0 / 12.0) * (p.cot_theta / (p.fr * p.fr)) * h * h, ops);
    b.momentum.capillary = (5.0 / 6.0) * (p.ka / p.re) * ops.dealias(h * hxxx);
    b.momentum.relaxation =
        (5.0 / (2.0 * eps * p.re)) * ops.dealias((1.0 / 3.0) * p.gravity() * h - q / (h * h));
    b.momentum.viscous =
        (eps / p.re) * ops.dealias(4.5 * qxx - 4.5 * qx * hx / h + 4.0 * q * hx * hx / (h * h) -
                                   6.0 * q_over_h * hxx);
    const RealField gamma_tx = ops.deriv(r.tendency.dgamma_dt, 1);
    b.momentum.marangoni =
        -1.25 * p.mr * gx +
        (marangoni / 16.0) * ops.dealias((1.0 / 3.0) * h * h * gamma_tx +
                                         (15.0 / 14.0) * h * q * gxx +
                                         (19.0 / 21.0) * h * qx * gx + (5.0 / 7.0) * q * gx * hx);
    require_finite(b.momentum.inertia, "momentum.inertia");
    require_finite(b.momentum.capillary, "momentum.capillary");
    require_finite(b.momentum.relaxation, "momentum.relaxation");
    require_finite(b.momentum.viscous, "momentum.viscous");
    require_finite(b.momentum.marangoni, "momentum.marangoni");

    r.tendency.dq_dt = b.momentum.inertia + b.momentum.hydrostatic + b.momentum.capillary +
                       b.momentum.relaxation + b.momentum.viscous + b.momentum.marangoni;
    return r;
}

} // namespace filmsolve
