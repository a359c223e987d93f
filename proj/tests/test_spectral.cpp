#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_support.hpp"

using namespace filmsolve;
using test::max_abs;

namespace {

constexpr double kPi = std::numbers::pi;

} // namespace

TEST(Grid, Layout) {
    const Grid g(64, 20.0);
    EXPECT_EQ(g.n(), 64);
    EXPECT_DOUBLE_EQ(g.dx(), 20.0 / 64);
    EXPECT_DOUBLE_EQ(g.x()[0], 0.0);
    EXPECT_NEAR(g.x()[63], 20.0 - 20.0 / 64, 1e-14);
    EXPECT_NEAR(g.wavenumber(3), 2 * kPi * 3 / 20.0, 1e-15);
    EXPECT_EQ(g.dealias_cutoff(), 21);
}

TEST(Grid, RejectsBadSizes) {
    EXPECT_THROW(Grid(15, 1.0), Error);
    EXPECT_THROW(Grid(8, 1.0), Error);
    EXPECT_THROW(Grid(64, 0.0), Error);
}

TEST(Spectral, DerivativeExamples) {
    const Spectral ops(Grid(64, 20.0));
    const double k = 2 * kPi / 20.0;
    const RealField f = ops.sample([&](double x) { return std::sin(k * x); });
    const RealField c = ops.sample([&](double x) { return std::cos(k * x); });
    EXPECT_LE(max_abs(ops.deriv(f, 1) - k * c), 1e-12);
    EXPECT_LE(max_abs(ops.deriv(f, 2) + k * k * f), 1e-12);
    EXPECT_LE(max_abs(ops.deriv(f, 3) + k * k * k * c), 1e-12);
    EXPECT_LE(max_abs(ops.deriv(RealField::Constant(64, 3.0), 1)), 1e-15);
}

TEST(Spectral, DerivativesOfRandomSeries) {
    std::mt19937_64 rng(3);
    const Spectral ops(Grid(128, 17.0));
    for (int i = 0; i < 20; ++i) {
        const auto f = test::FourierSeries::random(rng, 17.0, 0.3, 1.0, 40);
        const RealField u = f.sample(ops.grid());
        for (int order = 1; order <= 3; ++order) {
            const RealField exact = f.sample(ops.grid(), order);
            EXPECT_LE(max_abs(ops.deriv(u, order) - exact), 1e-11 * max_abs(exact)) << order;
        }
        const auto d = ops.derivs123(u);
        EXPECT_TRUE((d[1] == ops.deriv(u, 2)).all());
    }
}

TEST(Spectral, Linearity) {
    std::mt19937_64 rng(4);
    const Spectral ops(Grid(64, 5.0));
    for (int i = 0; i < 20; ++i) {
        const RealField a = test::FourierSeries::random(rng, 5.0, 1.0, 1.0, 20).sample(ops.grid());
        const RealField b = test::FourierSeries::random(rng, 5.0, 1.0, 1.0, 20).sample(ops.grid());
        const double alpha = test::uniform(rng, -2, 2), beta = test::uniform(rng, -2, 2);
        const RealField lhs = ops.deriv(alpha * a + beta * b, 1);
        const RealField rhs = alpha * ops.deriv(a, 1) + beta * ops.deriv(b, 1);
        EXPECT_LE(max_abs(lhs - rhs), 1e-11 * max_abs(rhs));
    }
}

TEST(Spectral, FirstDerivativeIntegratesToZero) {
    std::mt19937_64 rng(5);
    const Spectral ops(Grid(128, 20.0));
    for (int i = 0; i < 50; ++i) {
        const RealField f =
            test::FourierSeries::random(rng, 20.0, 1.0, 1.0, 30).sample(ops.grid());
        EXPECT_LE(std::abs(ops.integrate(ops.deriv(f, 1))), 1e-12);
    }
}

TEST(Spectral, RepeatedFirstDerivativeMatchesSecond) {
    std::mt19937_64 rng(6);
    const Spectral ops(Grid(128, 20.0));
    for (int i = 0; i < 20; ++i) {
        const RealField f =
            test::FourierSeries::random(rng, 20.0, 1.0, 1.0, 40).sample(ops.grid());
        const RealField dd = ops.deriv(ops.deriv(f, 1), 1);
        EXPECT_LE(max_abs(dd - ops.deriv(f, 2)), 1e-11 * max_abs(dd));
    }
}

TEST(Spectral, ParsevalIdentity) {
    std::mt19937_64 rng(7);
    const Spectral ops(Grid(128, 20.0));
    for (int i = 0; i < 50; ++i) {
        RealField f = test::FourierSeries::random(rng, 20.0, 0.5, 1.0, 60).sample(ops.grid());
        const double direct = ops.integrate(f * f);
        EXPECT_NEAR(ops.spectral_energy(f), direct, 1e-12 * direct);
    }
}

TEST(Spectral, ParsevalWithNyquistContent) {
    const Spectral ops(Grid(16, 1.0));
    RealField f(16);
    for (int j = 0; j < 16; ++j) f[j] = (j % 2 == 0 ? 1.0 : -1.0) + 0.25;
    const double direct = ops.integrate(f * f);
    EXPECT_NEAR(ops.spectral_energy(f), direct, 1e-14 * direct);
}

TEST(Spectral, ForwardBackwardRoundTrip) {
    std::mt19937_64 rng(8);
    const Spectral ops(Grid(96, 3.0));
    RealField f(96);
    for (auto& v : f) v = test::uniform(rng, -1, 1);
    EXPECT_LE(max_abs(ops.backward(ops.forward(f)) - f), 1e-14);
}

TEST(Spectral, DealiasCosineSquared) {
    // cos^2(k_m x) = 1/2 + cos(2 k_m x)/2: the 2m mode survives below the
    // cutoff and is removed above it.
    const Spectral ops(Grid(64, 2 * kPi));
    const RealField low = ops.sample([](double x) { return std::cos(5 * x); });
    EXPECT_LE(max_abs(ops.dealias_product(low, low) -
                      ops.sample([](double x) { return 0.5 + 0.5 * std::cos(10 * x); })),
              1e-14);
    const RealField high = ops.sample([](double x) { return std::cos(15 * x); });
    EXPECT_LE(max_abs(ops.dealias_product(high, high) - RealField::Constant(64, 0.5)), 1e-14);
}

TEST(Spectral, DealiasKeepsModesAtCutoff) {
    const Spectral ops(Grid(64, 2 * kPi));
    const RealField kept = ops.sample([](double x) { return std::sin(21 * x); });
    const RealField dropped = ops.sample([](double x) { return std::sin(22 * x); });
    EXPECT_LE(max_abs(ops.dealias(kept) - kept), 1e-13);
    EXPECT_LE(max_abs(ops.dealias(dropped)), 1e-13);
    EXPECT_LE(max_abs(ops.dealias(RealField::Constant(64, 2.0)) - 2.0), 1e-15);
}

TEST(Spectral, OddDerivativeOfNyquistModeIsZero) {
    const Spectral ops(Grid(16, 1.0));
    RealField f(16);
    for (int j = 0; j < 16; ++j) f[j] = j % 2 == 0 ? 1.0 : -1.0;
    EXPECT_LE(max_abs(ops.deriv(f, 1)), 1e-14);
    EXPECT_LE(max_abs(ops.deriv(f, 3)), 1e-14);
    const double kn = ops.wavenumber(8);
    EXPECT_LE(max_abs(ops.deriv(f, 2) + kn * kn * f), 1e-10);
}

TEST(Spectral, RejectsBadInput) {
    const Spectral ops(Grid(32, 1.0));
    RealField f = RealField::Zero(32);
    EXPECT_THROW(ops.deriv(f, 4), Error);
    EXPECT_THROW(ops.deriv(RealField::Zero(31), 1), Error);
    f[3] = std::nan("");
    try {
        ops.deriv(f, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "non-finite");
    }
}

TEST(Spectral, FiniteDifferenceBackendIsFourthOrder) {
    auto error_at = [](int n) {
        const Spectral fd(Grid(n, 2 * kPi), DerivBackend::FiniteDifference4);
        const RealField f = fd.sample([](double x) { return std::sin(x) + 0.3 * std::cos(2 * x); });
        const RealField exact =
            fd.sample([](double x) { return std::cos(x) - 0.6 * std::sin(2 * x); });
        return max_abs(fd.deriv(f, 1) - exact);
    };
    const double order = std::log2(error_at(32) / error_at(64));
    EXPECT_NEAR(order, 4.0, 0.15);
}

TEST(Spectral, FiniteDifferenceAgreesWithSpectralOnSmoothField) {
    const Grid g(512, 2 * kPi);
    const Spectral sp(g), fd(g, DerivBackend::FiniteDifference4);
    const RealField f = sp.sample([](double x) { return std::exp(std::sin(x)); });
    for (int order = 1; order <= 3; ++order)
        EXPECT_LE(max_abs(sp.deriv(f, order) - fd.deriv(f, order)), 1e-6) << order;
}

TEST(Spectral, CopiesShareNothingMutable) {
    const Spectral a(Grid(32, 1.0));
    const Spectral b = a;
    const RealField f = a.sample([](double x) { return std::sin(2 * kPi * x); });
    EXPECT_TRUE((a.deriv(f, 1) == b.deriv(f, 1)).all());
}
