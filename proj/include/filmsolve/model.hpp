#pragma once

// Physical parameters, algebraic closures and the uniform base state of the
// soluble-surfactant falling-film model.

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace filmsolve {

/// Error raised for invalid inputs or states that leave the model's domain.
/// `code()` is a short machine-readable tag ("nonpositive-thickness", ...).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Surface-transport closure. Legacy carries the 5/4 coefficient on the
/// Gamma*Gamma_x*h_x coupling term, Corrected carries 1/4.
enum class Variant { Legacy, Corrected };

inline std::string_view to_string(Variant v) {
    return v == Variant::Legacy ? "legacy" : "corrected";
}

inline Variant parse_variant(std::string_view s) {
    if (s == "legacy") return Variant::Legacy;
    if (s == "corrected") return Variant::Corrected;
    throw Error("bad-variant", "expected 'legacy' or 'corrected', got '" + std::string(s) + "'");
}

/// Multiplier on the Gamma*Gamma_x*h_x term inside the surface Marangoni bracket.
constexpr double coupling_multiplier(Variant v) { return v == Variant::Legacy ? 5.0 : 1.0; }

/// How the x-diffusion of bulk surfactant is assembled.
///
/// Conservative: (eps/Pe_b) d/dx [chi_x + h phi_x], an exact divergence.
/// Literal: (eps/Pe_b) [chi_xx - 3 chi h_x^2 / h^2 + h phi_xx], which differs
/// from the conservative form by -(eps/Pe_b) h_x (phi_x + 3 chi h_x / h^2),
/// i.e. the slope contribution of the diffusive flux through the free surface.
enum class BulkDiffusion { Conservative, Literal };

inline std::string_view to_string(BulkDiffusion b) {
    return b == BulkDiffusion::Conservative ? "conservative" : "literal";
}

inline BulkDiffusion parse_bulk_diffusion(std::string_view s) {
    if (s == "conservative") return BulkDiffusion::Conservative;
    if (s == "literal") return BulkDiffusion::Literal;
    throw Error("bad-bulk-diffusion",
                "expected 'conservative' or 'literal', got '" + std::string(s) + "'");
}

/// Dimensionless groups. The Weber number only enters through ka = eps^2 Re We.
struct ModelParams {
    double re = 0.0;
    double fr = 0.0;
    double cot_theta = 0.0;
    double pe_b = 0.0;
    double pe_s = 0.0;
    double eps = 0.0;
    double mr = 0.0;
    double k_s = 0.0;
    double kappa = 0.0;
    double gamma_e = 0.0;
    double ka = 0.0;
    double domain_length = 0.0;

    /// Scales the surface-side adsorption source in the Legacy variant only.
    /// 1.0 keeps the bulk and surface sources equal and opposite.
    double legacy_source_mismatch = 1.0;
    BulkDiffusion bulk_diffusion = BulkDiffusion::Conservative;

    /// Throws Error("invalid-params", ...) naming the first violated constraint.
    void validate() const {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw Error("invalid-params", what);
        };
        auto finite = [](double v) { return std::isfinite(v); };
        require(finite(re) && re > 0, "re must be > 0");
        require(finite(fr) && fr > 0, "fr must be > 0");
        require(finite(cot_theta) && cot_theta >= 0, "cot_theta must be >= 0");
        require(finite(pe_b) && pe_b > 0, "pe_b must be > 0");
        require(finite(pe_s) && pe_s > 0, "pe_s must be > 0");
        require(finite(eps) && eps > 0 && eps < 1, "eps must lie in (0, 1)");
        require(finite(mr), "mr must be finite");
        require(finite(k_s) && k_s >= 0, "k_s must be >= 0");
        require(finite(kappa) && kappa >= 0, "kappa must be >= 0");
        require(finite(gamma_e) && gamma_e >= 0 && gamma_e < 1, "gamma_e must lie in [0, 1)");
        require(finite(ka) && ka >= 0, "ka must be >= 0");
        require(finite(domain_length) && domain_length > 0, "domain_length must be > 0");
        require(finite(legacy_source_mismatch), "legacy_source_mismatch must be finite");
    }

    /// Re/Fr^2, the gravity group driving the base flow.
    double gravity() const { return re / (fr * fr); }

    /// Pe_b k_s / 3, the prefactor of the chi closure.
    double chi_prefactor() const { return pe_b * k_s / 3.0; }

    bool operator==(const ModelParams&) const = default;
};

/// Reference parameter set; the inclination is left to the caller.
inline ModelParams reference_params(double cot_theta) {
    ModelParams p;
    p.re = 1.5;
    p.fr = 0.7071;
    p.cot_theta = cot_theta;
    p.pe_b = 700.0;
    p.pe_s = 700.0;
    p.eps = 0.1;
    p.mr = 1.0;
    p.k_s = 1.0;
    p.kappa = 10.0;
    p.gamma_e = 0.1;
    p.ka = 0.75;
    p.domain_length = 20.0;
    return p;
}

struct EquilibriumState {
    double h_e = 1.0;
    double q_e = 0.0;
    double gamma_eq = 0.0;
    double phi_e = 0.0;
    double chi_e = 0.0;

    /// Bulk content S = chi + phi h at equilibrium.
    double s_e() const { return chi_e + phi_e * h_e; }
};

/// Steady flux for thickness h: the root of (1/3)(Re/Fr^2) h - q/h^2.
inline double nusselt_flux(double h, const ModelParams& p) {
    return (1.0 / 3.0) * p.gravity() * h * h * h;
}

/// Uniform fixed point: Nusselt flux at h = 1, Langmuir-balanced loading, chi = 0.
inline EquilibriumState equilibrium_state(const ModelParams& p) {
    p.validate();
    if (p.gamma_e > 0 && p.kappa == 0)
        throw Error("invalid-params", "kappa = 0 admits no finite phi_e for gamma_e > 0");
    EquilibriumState e;
    e.h_e = 1.0;
    e.q_e = nusselt_flux(e.h_e, p);
    e.gamma_eq = p.gamma_e;
    e.phi_e = p.gamma_e == 0 ? 0.0 : p.gamma_e / (p.kappa * (1.0 - p.gamma_e));
    e.chi_e = 0.0;
    return e;
}

/// Excess bulk content chi = (Pe_b k_s / 3) h^2 [kappa (1 - Gamma) phi - Gamma].
template <typename T>
auto chi_closure(const T& h, const T& gamma, const T& phi, const ModelParams& p) {
    return p.chi_prefactor() * h * h * (p.kappa * (1.0 - gamma) * phi - gamma);
}

inline double chi_closure(double h, double gamma, double phi, const ModelParams& p) {
    return p.chi_prefactor() * h * h * (p.kappa * (1.0 - gamma) * phi - gamma);
}

/// Inverts S = phi h + chi(h, Gamma, phi) for phi; the closure is linear in phi.
inline double recover_phi(double s, double h, double gamma, const ModelParams& p) {
    if (!(h > 0)) throw Error("nonpositive-thickness", "recover_phi requires h > 0");
    const double a = p.chi_prefactor() * h * h;
    const double denom = h + a * p.kappa * (1.0 - gamma);
    if (!(denom > 0) || !std::isfinite(denom))
        throw Error("state-out-of-range",
                    "phi recovery denominator vanished (gamma = " + std::to_string(gamma) + ")");
    return (s + a * gamma) / denom;
}

/// Langmuir exchange k_s [kappa (1 - Gamma) C_s - Gamma]; positive means
/// adsorption onto the surface.
inline double langmuir_flux(double gamma, double c_surface, const ModelParams& p) {
    return p.k_s * (p.kappa * (1.0 - gamma) * c_surface - gamma);
}

} // namespace filmsolve
