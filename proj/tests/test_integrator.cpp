#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace filmsolve;
using test::max_abs;

namespace {

double state_distance(const State& a, const State& b) {
    return std::max({max_abs(a.h - b.h), max_abs(a.q - b.q), max_abs(a.s - b.s),
                     max_abs(a.gamma - b.gamma)});
}

State cosine_state(const ModelParams& p, const Grid& g, double amplitude) {
    RunConfig c;
    c.params = p;
    c.n = g.n();
    c.ic.amplitude = amplitude;
    return build_initial_condition(c, g);
}

} // namespace

TEST(Integrator, StepPreservesEquilibrium) {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 10; ++i) {
        const ModelParams p = test::random_params(rng);
        const Spectral ops(Grid(64, p.domain_length));
        const State eq = State::uniform(equilibrium_state(p), 64);
        const ImexStepper stepper(p, Variant::Legacy, ops);
        for (double dt : {1e-4, 1e-2, 0.5}) {
            const StepOutcome o = stepper.step(eq, dt);
            EXPECT_LE(state_distance(o.state, eq), 1e-12) << dt;
            EXPECT_LE(state_distance(o.error, State{RealField::Zero(64), RealField::Zero(64),
                                                    RealField::Zero(64), RealField::Zero(64)}),
                      1e-12);
        }
    }
}

TEST(Integrator, LongRunStaysAtEquilibrium) {
    const ModelParams p = test::reference_set();
    const Spectral ops(Grid(64, p.domain_length));
    const State eq = State::uniform(equilibrium_state(p), 64);
    const ImexStepper stepper(p, Variant::Corrected, ops);
    const RunResult r = integrate_to(stepper, eq, 0.0, 100.0, StepControl{});
    EXPECT_EQ(r.status, RunStatus::Completed);
    EXPECT_EQ(r.t, 100.0);
    EXPECT_LE(state_distance(r.state, eq), 1e-9);
}

TEST(Integrator, UniformFluxRelaxationIsSecondOrder) {
    // A uniform flux excess decays as exp(-r t) with r = 5/(2 eps Re); the
    // problem is exactly linear, so the step reduces to the trapezoidal rule.
    const ModelParams p = test::reference_set();
    const Spectral ops(Grid(32, p.domain_length));
    const EquilibriumState e = equilibrium_state(p);
    State u0 = State::uniform(e, 32);
    const double delta = 0.01;
    u0.q += delta;
    const ImexStepper stepper(p, Variant::Corrected, ops);
    const double r = 5.0 / (2.0 * p.eps * p.re);
    const double t_end = 0.3;
    auto error = [&](long steps) {
        const State u = integrate_fixed(stepper, u0, 0.0, t_end, steps);
        return max_abs(u.q - e.q_e - delta * std::exp(-r * t_end));
    };
    const double e1 = error(30), e2 = error(60), e3 = error(120);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.05);
    EXPECT_NEAR(std::log2(e2 / e3), 2.0, 0.05);
    EXPECT_LE(e3, 1e-6);
}

TEST(Integrator, RichardsonOrderOnWavyFilm) {
    const ModelParams p = test::reference_set();
    const Spectral ops(Grid(64, p.domain_length));
    const State u0 = cosine_state(p, ops.grid(), 0.1);
    const ImexStepper stepper(p, Variant::Corrected, ops);
    const State a = integrate_fixed(stepper, u0, 0.0, 10.0, 1000);
    const State b = integrate_fixed(stepper, u0, 0.0, 10.0, 2000);
    const State c = integrate_fixed(stepper, u0, 0.0, 10.0, 4000);
    const double order = std::log2(state_distance(a, b) / state_distance(b, c));
    EXPECT_GE(order, 1.8);
    EXPECT_LE(order, 2.2);
}

TEST(Integrator, ZeroLengthIntervalTakesNoSteps) {
    const ModelParams p = test::reference_set();
    const Spectral ops(Grid(32, p.domain_length));
    const State u0 = cosine_state(p, ops.grid(), 0.1);
    const ImexStepper stepper(p, Variant::Corrected, ops);
    const RunResult r = integrate_to(stepper, u0, 2.0, 2.0, StepControl{});
    EXPECT_EQ(r.status, RunStatus::Completed);
    EXPECT_EQ(r.accepted, 0);
    EXPECT_TRUE(r.state == u0);
    EXPECT_THROW(integrate_to(stepper, u0, 2.0, 1.0, StepControl{}), Error);
}

TEST(Integrator, RunsAreBitReproducible) {
    const ModelParams p = test::reference_set();
    const Spectral ops(Grid(64, p.domain_length));
    const State u0 = cosine_state(p, ops.grid(), 0.1);
    const ImexStepper stepper(p, Variant::Legacy, ops);
    const RunResult a = integrate_to(stepper, u0, 0.0, 5.0, StepControl{});
    const Spectral ops2(Grid(64, p.domain_length));
    const ImexStepper stepper2(p, Variant::Legacy, ops2);
    const RunResult b = integrate_to(stepper2, u0, 0.0, 5.0, StepControl{});
    EXPECT_TRUE(a.state == b.state);
    EXPECT_EQ(a.accepted, b.accepted);
    EXPECT_EQ(a.rejected, b.rejected);
}

TEST(Integrator, RejectedStepsLeaveStateUntouched) {
    const ModelParams p = test::reference_set();
    const Spectral ops(Grid(64, p.domain_length));
    const State u0 = cosine_state(p, ops.grid(), 0.1);
    const State copy = u0;
    const ImexStepper stepper(p, Variant::Corrected, ops);
    StepControl control;
    control.dt_init = 0.5;
    control.rel_tol = 1e-9;
    control.abs_tol = 1e-11;

    State first;
    double first_dt = 0.0;
    const RunResult r = integrate_to(stepper, u0, 0.0, 0.05, control,
                                     [&](double, const State& st, double dt) {
                                         if (first_dt == 0.0) {
                                             first = st;
                                             first_dt = dt;
                                         }
                                     });
    EXPECT_EQ(r.status, RunStatus::Completed);
    EXPECT_GT(r.rejected, 0);
    EXPECT_TRUE(u0 == copy);
    // The first accepted step started from the untouched initial state.
    EXPECT_TRUE(stepper.step(copy, first_dt).state == first);
}

TEST(Integrator, HitsStopTimesExactly) {
    const ModelParams p = test::reference_set();
    const Spectral ops(Grid(32, p.domain_length));
    const State u0 = cosine_state(p, ops.grid(), 0.05);
    const ImexStepper stepper(p, Variant::Corrected, ops);
    std::vector<double> seen;
    const std::vector<double> stops = {0.1, 0.25, 0.25, 0.7, 3.0};
    integrate_to(stepper, u0, 0.0, 1.0, StepControl{},
                 [&](double t, const State&, double) { seen.push_back(t); }, stops);
    for (double s : {0.1, 0.25, 0.7, 1.0})
        EXPECT_EQ(std::count(seen.begin(), seen.end(), s), 1) << s;
    EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
    EXPECT_EQ(seen.back(), 1.0);
}

TEST(Integrator, StepBudgetExhaustion) {
    const ModelParams p = test::reference_set();
    const Spectral ops(Grid(32, p.domain_length));
    const State u0 = cosine_state(p, ops.grid(), 0.05);
    const ImexStepper stepper(p, Variant::Corrected, ops);
    StepControl control;
    control.max_steps = 5;
    const RunResult r = integrate_to(stepper, u0, 0.0, 10.0, control);
    EXPECT_EQ(r.status, RunStatus::MaxSteps);
    EXPECT_EQ(r.accepted, 5);
    EXPECT_LT(r.t, 10.0);
}

TEST(Integrator, UnresolvableRunReportsBlowUp) {
    // A fixed, far-too-large step cannot meet the tolerance and cannot shrink.
    const ModelParams p = test::reference_set();
    const Spectral ops(Grid(64, p.domain_length));
    const State u0 = cosine_state(p, ops.grid(), 0.3);
    const ImexStepper stepper(p, Variant::Corrected, ops);
    StepControl control;
    control.dt_min = control.dt_init = control.dt_max = 0.5;
    control.rel_tol = 1e-10;
    control.abs_tol = 1e-12;
    const RunResult r = integrate_to(stepper, u0, 0.0, 10.0, control);
    EXPECT_EQ(r.status, RunStatus::BlowUp);
    EXPECT_FALSE(r.message.empty());
    EXPECT_FALSE(has_error(validate_state(r.state, p)));
}

TEST(Integrator, ControlValidation) {
    StepControl c;
    EXPECT_NO_THROW(c.validate());
    c.dt_min = 1.0;
    EXPECT_THROW(c.validate(), Error);
    c = StepControl{};
    c.safety_factor = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c = StepControl{};
    c.rel_tol = -1.0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Integrator, AdaptiveRunMatchesFineFixedRun) {
    const ModelParams p = test::reference_set();
    const Spectral ops(Grid(64, p.domain_length));
    const State u0 = cosine_state(p, ops.grid(), 0.1);
    const ImexStepper stepper(p, Variant::Corrected, ops);
    StepControl control;
    control.rel_tol = 1e-8;
    control.abs_tol = 1e-10;
    const RunResult adaptive = integrate_to(stepper, u0, 0.0, 5.0, control);
    const State fixed = integrate_fixed(stepper, u0, 0.0, 5.0, 20000);
    EXPECT_LE(state_distance(adaptive.state, fixed), 1e-5);
}
