#pragma once

// Second-order IMEX time stepping with adaptive step control.
//
// The stiff part is a constant-coefficient linear operator, diagonal in
// Fourier space except for a 2x2 (h, q) block per mode:
//
//   h_t = -i k q
//   q_t = a (i k)^3 h - (r - nu (i k)^2) q      a  = (5/6)(Ka/Re) mean(h)
//                                                r  = 5 / (2 eps Re mean(h)^2)
//                                                nu = (9/2) eps / Re
//   S_t = (eps/Pe_b)(i k)^2 S,  Gamma_t = (eps/Pe_s)(i k)^2 Gamma
//
// It is advanced with the trapezoidal rule; the remainder N = F - L U uses
// Heun's predictor-corrector. The predictor is a first-order solution and
// its distance from the corrector is the local error estimate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "filmsolve/model.hpp"
#include "filmsolve/rhs.hpp"
#include "filmsolve/spectral.hpp"

namespace filmsolve {

struct StepControl {
    double dt_init = 1e-3;
    double dt_min = 1e-10;
    double dt_max = 0.5;
    double rel_tol = 1e-5;
    double abs_tol = 1e-7;
    double safety_factor = 0.9;
    long max_steps = 50'000'000;

    void validate() const {
        if (!(dt_min > 0 && dt_min <= dt_init && dt_init <= dt_max))
            throw Error("invalid-control", "require 0 < dt_min <= dt_init <= dt_max");
        if (!(rel_tol > 0 && abs_tol > 0)) throw Error("invalid-control", "tolerances must be > 0");
        if (!(safety_factor > 0 && safety_factor <= 1))
            throw Error("invalid-control", "safety_factor must lie in (0, 1]");
        if (max_steps <= 0) throw Error("invalid-control", "max_steps must be > 0");
    }

    bool operator==(const StepControl&) const = default;
};

enum class RunStatus { Completed, BlowUp, MaxSteps };

inline std::string_view to_string(RunStatus s) {
    switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::BlowUp: return "blow-up";
    default: return "max-steps";
    }
}

struct RunResult {
    State state;
    double t = 0.0;
    RunStatus status = RunStatus::Completed;
    long accepted = 0;
    long rejected = 0;
    double wall_seconds = 0.0;
    std::string message;
};

struct StepOutcome {
    State state;
    State error;  // corrector minus predictor
};

/// Called after every accepted step with (t, state, dt of that step).
using Observer = std::function<void(double, const State&, double)>;

class ImexStepper {
public:
    ImexStepper(ModelParams params, Variant variant, const Spectral& ops)
        : params_(std::move(params)), variant_(variant), ops_(ops) {
        params_.validate();
    }

    const ModelParams& params() const { return params_; }
    Variant variant() const { return variant_; }
    const Spectral& ops() const { return ops_; }

    /// One IMEX step of size dt. Throws Error if the right-hand side cannot
    /// be evaluated at the input or the predictor.
    StepOutcome step(const State& u, double dt) const {
        if (!(dt > 0)) throw Error("bad-step", "dt must be positive");
        const Operator op = linear_operator(u);

        const Spectra u_hat = to_spectra(u);
        const Spectra n0 = remainder(u, u_hat, op);

        // Shared explicit part (I + dt/2 L) U.
        Spectra base = u_hat;
        apply_linear(op, u_hat, base, 0.5 * dt);

        Spectra rhs = base;
        axpy(rhs, dt, n0);
        const Spectra pred_hat = solve_implicit(op, rhs, dt);
        const State pred = to_state(pred_hat);

        const Spectra n1 = remainder(pred, pred_hat, op);
        rhs = base;
        axpy(rhs, 0.5 * dt, n0);
        axpy(rhs, 0.5 * dt, n1);
        const Spectra corr_hat = solve_implicit(op, rhs, dt);

        StepOutcome out;
        out.state = to_state(corr_hat);
        out.error = State{out.state.h - pred.h, out.state.q - pred.q, out.state.s - pred.s,
                          out.state.gamma - pred.gamma};
        return out;
    }

    /// Weighted RMS of the error estimate.
    static double error_norm(const StepOutcome& o, const State& prev, const StepControl& c) {
        double sum = 0.0;
        std::size_t count = 0;
        auto accumulate = [&](const RealField& e, const RealField& a, const RealField& b) {
            for (Eigen::Index j = 0; j < e.size(); ++j) {
                const double scale =
                    c.abs_tol + c.rel_tol * std::max(std::abs(a[j]), std::abs(b[j]));
                const double r = e[j] / scale;
                sum += r * r;
            }
            count += static_cast<std::size_t>(e.size());
        };
        accumulate(o.error.h, prev.h, o.state.h);
        accumulate(o.error.q, prev.q, o.state.q);
        accumulate(o.error.s, prev.s, o.state.s);
        accumulate(o.error.gamma, prev.gamma, o.state.gamma);
        return std::sqrt(sum / static_cast<double>(count));
    }

private:
    struct Operator {
        double capillary;   // a
        double relaxation;  // r
        double viscous;     // nu
        double diff_bulk;
        double diff_surface;
    };

    struct Spectra {
        ComplexSpectrum h, q, s, gamma;
    };

    Operator linear_operator(const State& u) const {
        const double hbar = u.h.mean();
        const ModelParams& p = params_;
        return {(5.0 / 6.0) * (p.ka / p.re) * hbar, 5.0 / (2.0 * p.eps * p.re * hbar * hbar),
                4.5 * p.eps / p.re, p.eps / p.pe_b, p.eps / p.pe_s};
    }

    Spectra to_spectra(const State& u) const {
        return {ops_.forward(u.h), ops_.forward(u.q), ops_.forward(u.s), ops_.forward(u.gamma)};
    }

    State to_state(const Spectra& c) const {
        return {ops_.backward(c.h), ops_.backward(c.q), ops_.backward(c.s),
                ops_.backward(c.gamma)};
    }

    // Symbol entries for mode m; odd powers of ik vanish at Nyquist to match
    // the spatial derivative.
    struct Symbol {
        std::complex<double> hq, qh, qq, ss, gg;
    };

    Symbol symbol(const Operator& op, Eigen::Index m) const {
        const double k = ops_.wavenumber(static_cast<int>(m));
        const bool nyquist = m == ops_.n() / 2;
        const std::complex<double> ik(0.0, nyquist ? 0.0 : k);
        const double k2 = -k * k;  // (ik)^2
        return {-ik, op.capillary * ik * ik * ik, -op.relaxation + op.viscous * k2,
                op.diff_bulk * k2, op.diff_surface * k2};
    }

    // out += scale * L in
    void apply_linear(const Operator& op, const Spectra& in, Spectra& out, double scale) const {
        for (Eigen::Index m = 0; m < in.h.size(); ++m) {
            const Symbol L = symbol(op, m);
            out.h[m] += scale * (L.hq * in.q[m]);
            out.q[m] += scale * (L.qh * in.h[m] + L.qq * in.q[m]);
            out.s[m] += scale * (L.ss * in.s[m]);
            out.gamma[m] += scale * (L.gg * in.gamma[m]);
        }
    }

    // Solves (I - dt/2 L) x = rhs mode by mode.
    Spectra solve_implicit(const Operator& op, const Spectra& rhs, double dt) const {
        Spectra x = rhs;
        const double half = 0.5 * dt;
        for (Eigen::Index m = 0; m < rhs.h.size(); ++m) {
            const Symbol L = symbol(op, m);
            const std::complex<double> a11 = 1.0;
            const std::complex<double> a12 = -half * L.hq;
            const std::complex<double> a21 = -half * L.qh;
            const std::complex<double> a22 = 1.0 - half * L.qq;
            const std::complex<double> det = a11 * a22 - a12 * a21;
            x.h[m] = (a22 * rhs.h[m] - a12 * rhs.q[m]) / det;
            x.q[m] = (a11 * rhs.q[m] - a21 * rhs.h[m]) / det;
            x.s[m] = rhs.s[m] / (1.0 - half * L.ss);
            x.gamma[m] = rhs.gamma[m] / (1.0 - half * L.gg);
        }
        return x;
    }

    // N = F(u) - L u in spectral space.
    Spectra remainder(const State& u, const Spectra& u_hat, const Operator& op) const {
        const Tendency f = eval_rhs(u, params_, variant_, ops_).tendency;
        Spectra n{ops_.forward(f.dh_dt), ops_.forward(f.dq_dt), ops_.forward(f.ds_dt),
                  ops_.forward(f.dgamma_dt)};
        apply_linear(op, u_hat, n, -1.0);
        return n;
    }

    static void axpy(Spectra& y, double a, const Spectra& x) {
        y.h += a * x.h;
        y.q += a * x.q;
        y.s += a * x.s;
        y.gamma += a * x.gamma;
    }

    ModelParams params_;
    Variant variant_;
    const Spectral& ops_;
};

/// Adaptive integration from t0 to t1. Steps are clipped so that every time
/// in `stops` inside (t0, t1] and t1 itself are hit exactly.
inline RunResult integrate_to(const ImexStepper& stepper, const State& initial, double t0,
                              double t1, const StepControl& control,
                              const Observer& observer = {},
                              std::vector<double> stops = {}) {
    control.validate();
    if (!(t1 >= t0)) throw Error("bad-interval", "t1 must not precede t0");
    const auto wall_start = std::chrono::steady_clock::now();

    RunResult res;
    res.state = initial;
    res.t = t0;
    auto finish = [&](RunStatus status, std::string msg = {}) {
        res.status = status;
        res.message = std::move(msg);
        res.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
        return res;
    };
    if (t1 == t0) return finish(RunStatus::Completed);

    std::erase_if(stops, [&](double s) { return !(s > t0 && s < t1); });
    stops.push_back(t1);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
    std::size_t next_stop = 0;

    // PI controller for an error estimate of order 2 (embedded order 1).
    constexpr double kI = 0.7 / 2.0;
    constexpr double kP = 0.4 / 2.0;
    constexpr double max_growth = 5.0;
    constexpr double max_shrink = 0.2;

    double dt = control.dt_init;
    double prev_err = 1.0;
    while (true) {
        const double target = stops[next_stop];
        double dt_try = std::min(dt, control.dt_max);
        bool clipped = false;
        if (res.t + dt_try >= target - 1e-12 * std::max(1.0, std::abs(target))) {
            dt_try = target - res.t;
            clipped = true;
        }

        std::optional<StepOutcome> out;
        double err = std::numeric_limits<double>::infinity();
        std::string failure;
        try {
            out = stepper.step(res.state, dt_try);
            if (has_error(validate_state(out->state, stepper.params())))
                failure = "validator rejected the step result";
            else
                err = ImexStepper::error_norm(*out, res.state, control);
        } catch (const Error& e) {
            failure = e.what();
        }
        if (!std::isfinite(err) && failure.empty()) failure = "non-finite error estimate";

        if (err <= 1.0) {
            res.state = std::move(out->state);
            res.t = clipped ? target : res.t + dt_try;
            ++res.accepted;
            if (observer) observer(res.t, res.state, dt_try);
            const double e = std::max(err, 1e-10);
            double factor = control.safety_factor * std::pow(e, -kI) * std::pow(prev_err, kP);
            factor = std::clamp(factor, max_shrink, max_growth);
            prev_err = e;
            // Clipping shortens a step; it should not shrink the next proposal.
            const double proposal = std::clamp(dt_try * factor, control.dt_min, control.dt_max);
            dt = clipped ? std::max(proposal, dt) : proposal;
            if (clipped) {
                if (++next_stop == stops.size()) return finish(RunStatus::Completed);
            }
            if (res.accepted >= control.max_steps)
                return finish(RunStatus::MaxSteps, "step budget exhausted");
        } else {
            ++res.rejected;
            const double factor =
                std::isfinite(err)
                    ? std::clamp(control.safety_factor * std::pow(err, -0.5), max_shrink, 1.0)
                    : 0.25;
            dt = dt_try * factor;
            if (dt < control.dt_min)
                return finish(RunStatus::BlowUp,
                              failure.empty() ? "step size fell below dt_min" : failure);
        }
    }
}

/// Fixed-step integration, for convergence studies.
inline State integrate_fixed(const ImexStepper& stepper, const State& initial, double t0,
                             double t1, long steps) {
    if (steps <= 0) throw Error("bad-step", "steps must be positive");
    const double dt = (t1 - t0) / static_cast<double>(steps);
    State u = initial;
    for (long i = 0; i < steps; ++i) u = stepper.step(u, dt).state;
    return u;
}

} // namespace filmsolve
