#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nvmflow/spcore/core_model.hpp"
#include "oracles.hpp"

using namespace nvmflow::spcore;

TEST(DrainCurrent, ZeroAtZeroDrainBias)
{
    CoreModel m;
    for (double vg : {-0.3, 0.2, 0.9, 1.4}) EXPECT_EQ(m.drain_current(vg, 0.0), 0.0);
}

TEST(DrainCurrent, MatchesChannelIntegralOracle)
{
    CoreModel m;
    const auto& p = m.params();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> vg(-0.5, 1.5), vds(0.01, 1.0);
    for (int i = 0; i < 25; ++i) {
        const double g = vg(rng), ds = vds(rng);
        auto q = [&](double vch) { return m.solve_charge_reference(g, vch); };
        const double integral = oracle::adaptive_simpson(q, 0.0, ds, 1e-15 * q(0.0) * ds);
        const double expected = p.mu0 * p.W / p.L * integral;
        const double actual = m.drain_current(g, ds, Solver::reference);
        EXPECT_NEAR(actual / expected, 1.0, 1e-8) << "V_g=" << g << " V_ds=" << ds;
    }
}

TEST(DrainCurrent, SignFollowsDrainBias)
{
    CoreModel m;
    EXPECT_GT(m.drain_current(0.8, 0.3), 0.0);
    EXPECT_LT(m.drain_current(0.8, -0.3), 0.0);
}

TEST(DrainCurrent, SubthresholdSlopeIsIdeal)
{
    CoreModel m;
    const double v1 = -0.30, v2 = -0.20;
    const double decades = std::log10(m.drain_current(v2, 0.05) / m.drain_current(v1, 0.05));
    const double slope_mv = (v2 - v1) / decades * 1e3;
    EXPECT_NEAR(slope_mv / 59.6, 1.0, 0.02);
    EXPECT_NEAR(slope_mv, m.derived().V_t * std::log(10.0) * 1e3, 0.05);
}

TEST(DrainCurrent, BracketIsAntiderivativeOfChannelCharge)
{
    CoreModel m;
    for (double lq = -12; lq < -1; lq += 0.25) {
        const double q = std::exp(lq);
        const double h = 1e-5 * q;
        const double numeric = (m.current_bracket(q + h) - m.current_bracket(q - h)) / (2 * h);
        const double analytic = q * -m.implicit_slope(q);
        EXPECT_NEAR(numeric / analytic, 1.0, 1e-8) << "Q=" << q;
    }
}

TEST(EffectWrappers, DisabledIsPureCore)
{
    CoreModel m;
    const auto& p = m.params();
    for (double vds : {-0.7, 0.05, 1.0}) {
        const double qs = m.solve_charge_householder(1.0, 0.0);
        const double qd = m.solve_charge_householder(1.0, vds);
        const double pure = p.mu0 * (p.W / p.L) * m.bracket_difference(qs, qd);
        EXPECT_EQ(m.drain_current(1.0, vds), pure);
    }
}

TEST(EffectWrappers, InfiniteCriticalFieldRestoresMobility)
{
    ModelParams p;
    p.mobility_degradation = true;
    p.E_mob = 1e30;
    CoreModel m(p);
    auto e = m.effect_wrappers(0.02, 0.01, 0.5);
    EXPECT_NEAR(e.mu_eff / p.mu0, 1.0, 1e-9);
}

TEST(EffectWrappers, ReduceCurrent)
{
    ModelParams p;
    CoreModel plain(p);
    p.mobility_degradation = true;
    p.velocity_saturation = true;
    CoreModel degraded(p);
    EXPECT_LT(degraded.drain_current(1.0, 1.0), plain.drain_current(1.0, 1.0));
    EXPECT_GT(degraded.drain_current(1.0, 1.0), 0.0);
}

class GummelSymmetry : public ::testing::TestWithParam<bool> {};

TEST_P(GummelSymmetry, OddInAntisymmetricDrive)
{
    ModelParams p;
    p.mobility_degradation = GetParam();
    p.velocity_saturation = GetParam();
    CoreModel m(p);
    for (double vg : {0.2, 0.6, 1.2}) {
        auto current = [&](double vx) { return m.evaluate(vg, 0.5 * vx, -0.5 * vx).I; };
        for (double vx : {1e-4, 0.01, 0.3}) EXPECT_EQ(current(vx) + current(-vx), 0.0);
        const double h = 1e-3;
        auto d = oracle::central_differences(current, 0.0, h);
        const double odd_scale = std::max(std::abs(d.d1 * h), std::abs(d.d3 * h * h * h));
        EXPECT_LE(std::abs(d.d2 * h * h), 1e-9 * odd_scale);
    }
}

INSTANTIATE_TEST_SUITE_P(Effects, GummelSymmetry, ::testing::Values(false, true));

class AnalyticGradient : public ::testing::TestWithParam<bool> {};

TEST_P(AnalyticGradient, MatchesFiniteDifferences)
{
    ModelParams p;
    p.mobility_degradation = GetParam();
    p.velocity_saturation = GetParam();
    CoreModel m(p);
    struct Bias {
        double g, d, s;
    };
    for (Bias b : {Bias{0.9, 0.6, 0.0}, Bias{0.3, 0.05, 0.0}, Bias{1.2, -0.4, 0.1}, Bias{0.7, 1.0, 0.2}}) {
        auto t = m.evaluate(b.g, b.d, b.s, Solver::reference);
        const double h = 1e-6;
        const double fg = (m.evaluate(b.g + h, b.d, b.s, Solver::reference).I -
                           m.evaluate(b.g - h, b.d, b.s, Solver::reference).I) / (2 * h);
        const double fd = (m.evaluate(b.g, b.d + h, b.s, Solver::reference).I -
                           m.evaluate(b.g, b.d - h, b.s, Solver::reference).I) / (2 * h);
        const double fs = (m.evaluate(b.g, b.d, b.s + h, Solver::reference).I -
                           m.evaluate(b.g, b.d, b.s - h, Solver::reference).I) / (2 * h);
        // Saturated drain derivatives can be ~1e-12 of the gate term, so scale by the gradient norm.
        const double scale = std::max({std::abs(fg), std::abs(fd), std::abs(fs)});
        EXPECT_LE(std::abs(t.dI_dVg - fg), 1e-6 * scale);
        EXPECT_LE(std::abs(t.dI_dVd - fd), 1e-6 * scale);
        EXPECT_LE(std::abs(t.dI_dVs - fs), 1e-6 * scale);
        if (std::abs(fd) > 1e-3 * scale) EXPECT_NEAR(t.dI_dVd / fd, 1.0, 1e-5);
    }
}

INSTANTIATE_TEST_SUITE_P(Effects, AnalyticGradient, ::testing::Values(false, true));
