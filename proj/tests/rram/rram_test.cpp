#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nvmflow/engine/netlist.hpp"
#include "nvmflow/rram/harness.hpp"

using namespace nvmflow;
using namespace nvmflow::rram;

TEST(RramCurrent, ZeroAtZeroBias)
{
    const RramParams p;
    for (double x : {0.0, 0.3, 1.0}) EXPECT_EQ(rram_current(p, 0.0, x), 0.0);
}

TEST(RramCurrent, OhmicAtSmallBias)
{
    const RramParams p;
    const double v = p.V0 / 10;
    EXPECT_NEAR(rram_current(p, v, 1.0) / (p.G_on * v), 1.0, 0.01);
}

TEST(RramCurrent, LogInterpolatedConductance)
{
    const RramParams p;
    EXPECT_EQ(conductance(p, 0.0), p.G_off);
    EXPECT_EQ(conductance(p, 1.0), p.G_on);
    EXPECT_NEAR(conductance(p, 0.5), std::sqrt(p.G_on * p.G_off), 1e-15 * p.G_on);
    EXPECT_NEAR(state_for_conductance(p, conductance(p, 0.37)), 0.37, 1e-12);
}

TEST(RramCurrent, OddInVoltage)
{
    const RramParams p;
    for (double v : {0.01, 0.3, 1.1})
        for (double x : {0.0, 0.6, 1.0}) EXPECT_EQ(rram_current(p, -v, x), -rram_current(p, v, x));
}

TEST(RramRate, VanishesAtZeroBiasAndAtApproachedBound)
{
    const RramParams p;
    for (double x : {0.0, 0.5, 1.0}) EXPECT_EQ(state_rate(p, 0.0, x), 0.0);
    EXPECT_EQ(state_rate(p, 0.8, 1.0), 0.0);
    EXPECT_EQ(state_rate(p, -0.8, 0.0), 0.0);
}

TEST(RramRate, BipolarSigns)
{
    const RramParams p;
    for (double x : {0.1, 0.5, 0.9}) {
        EXPECT_GT(state_rate(p, 0.4, x), 0.0);
        EXPECT_LT(state_rate(p, -0.4, x), 0.0);
    }
}

TEST(RramEval, DerivativesMatchFiniteDifferences)
{
    const RramParams p;
    for (double v : {-0.9, -0.2, 0.05, 0.7})
        for (double x : {0.2, 0.5, 0.8}) {
            const auto e = evaluate(p, v, x);
            const double h = 1e-7;
            EXPECT_NEAR(e.dI_dV, (rram_current(p, v + h, x) - rram_current(p, v - h, x)) / (2 * h), 1e-6 * std::abs(e.dI_dV));
            EXPECT_NEAR(e.dI_dX, (rram_current(p, v, x + h) - rram_current(p, v, x - h)) / (2 * h), 1e-6 * std::abs(e.dI_dX));
            EXPECT_NEAR(e.drate_dV, (state_rate(p, v + h, x) - state_rate(p, v - h, x)) / (2 * h),
                        1e-6 * std::abs(e.drate_dV));
            EXPECT_NEAR(e.drate_dX, (state_rate(p, v, x + h) - state_rate(p, v, x - h)) / (2 * h),
                        1e-6 * std::abs(e.drate_dX) + 1e-6);
        }
}

TEST(RramParams, Validation)
{
    RramParams p;
    p.G_on = p.G_off / 2;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    RramParams q;
    q.p = 0.5;
    EXPECT_THROW(q.validate(), std::invalid_argument);
    RramParams r;
    EXPECT_THROW(r.set("nonsense", 1), std::invalid_argument);
    r.set("GON", 2e-3);
    EXPECT_EQ(r.G_on, 2e-3);
}

TEST(RramEngine, DcReadHoldsState)
{
    const auto n = engine::parse_netlist(".model r rram xinit=0.5\nV1 a 0 0.1\nXR1 a 0 model=r\n");
    engine::Simulator sim(n.circuit);
    const auto x = sim.op();
    const RramParams p;
    const double expect = std::sqrt(p.G_on * p.G_off) * p.V0 * std::sinh(0.1 / p.V0);
    EXPECT_NEAR(sim.current(x, "xr1"), expect, 1e-12 * expect);
    EXPECT_EQ(sim.voltage(x, "xr1.x"), 0.5);
    EXPECT_EQ(sim.rram_state("xr1"), 0.5);
}

TEST(RramEngine, StatePersistsAcrossAnalyses)
{
    const auto n = engine::parse_netlist(".model r rram\nV1 a 0 PULSE(0 1 0 1n 1n 20n 0)\nXR1 a 0 model=r\n");
    engine::Simulator sim(n.circuit);
    const double g0 = sim.current(sim.op(), "xr1");
    sim.transient({1e-9, 30e-9, false, engine::Integrator::backward_euler});
    EXPECT_GT(sim.rram_state("xr1"), 0.1);
    sim.set_source_dc("v1", 0.1);
    const double g1 = sim.current(sim.op(), "xr1");
    EXPECT_GT(g1, g0);
}

TEST(RramHysteresis, PinchedLoop)
{
    const RramParams p;
    const auto t = hysteresis_sweep(p, 1.2, 1e-3, 1e-6);
    const size_t n = t.rows.size();
    ASSERT_EQ(n, 1001u);
    double area = 0, max_i = 0;
    for (size_t k = 1; k < n; ++k) {
        const auto& a = t.rows[k - 1];
        const auto& b = t.rows[k];
        area += 0.5 * (a[2] + b[2]) * (b[1] - a[1]);
        max_i = std::max(max_i, std::abs(b[2]));
        if (b[1] == 0.0) EXPECT_EQ(b[2], 0.0) << "t=" << b[0];
    }
    EXPECT_EQ(t.rows[0][2], 0.0);
    EXPECT_EQ(t.rows[n / 2][2], 0.0);
    EXPECT_EQ(t.rows[n - 1][2], 0.0);
    EXPECT_GT(std::abs(area), 1e-6 * max_i * 1.2);

    // Near the origin the two branches of each lobe differ by the switched state.
    for (size_t k : {2u, 4u, 8u}) {
        const auto& set_up = t.rows[k];
        const auto& set_down = t.rows[n / 2 - k];
        const auto& reset_out = t.rows[n / 2 + k];
        const auto& reset_back = t.rows[n - 1 - k];
        ASSERT_NEAR(set_up[1], set_down[1], 1e-12);
        ASSERT_NEAR(reset_out[1], reset_back[1], 1e-12);
        EXPECT_GT(set_down[2] / set_up[2], 2.0) << set_up[1];
        EXPECT_GT(reset_out[2] / reset_back[2], 2.0) << reset_out[1];
    }
    // switched fully on in the positive lobe and back off in the negative lobe
    EXPECT_GT(t.rows[n / 2][3], 0.99);
    EXPECT_LT(t.rows[n - 1][3], 0.01);
}

TEST(RramDynamics, BoundedUnderRandomDrive)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> amp(-2.5, 2.5), unit(0.0, 1.0);
    const RramParams p;
    for (int trial = 0; trial < 1000; ++trial) {
        engine::Circuit c;
        c.set_model("r", p);
        const auto a = c.node("a"), b = c.node("b");
        const double per = 20e-9 * (0.2 + unit(rng));
        const engine::Pulse p1{amp(rng), amp(rng), 0, per * 0.2 * unit(rng), per * 0.2 * unit(rng),
                               per * 0.5 * unit(rng), per};
        const engine::Pulse p2{amp(rng) * 0.3, amp(rng) * 0.3, 5e-9 * unit(rng), 1e-9, 1e-9, 3e-9, 0};
        c.add(engine::VoltageSource{"v1", a, 0, {std::nullopt, p1}});
        c.add(engine::VoltageSource{"v2", b, a, {std::nullopt, p2}});
        c.add(engine::RramDevice{"xr1", b, 0, "r", unit(rng)});
        engine::Simulator sim(std::move(c));
        const auto t = sim.transient({1e-9, 60e-9, true, trial % 2 ? engine::Integrator::trapezoidal
                                                                   : engine::Integrator::backward_euler});
        const size_t k = t.index("v(xr1.x)");
        for (const auto& r : t.rows) {
            ASSERT_GE(r[k], 0.0) << "trial " << trial;
            ASSERT_LE(r[k], 1.0) << "trial " << trial;
        }
    }
}

TEST(RramDynamics, InertAtZeroBias)
{
    const auto n = engine::parse_netlist(".model r rram\nV1 a 0 0\nXR1 a 0 model=r x0=0.42\n");
    engine::Simulator sim(n.circuit);
    const auto t = sim.transient({1e-3, 1.0, true, engine::Integrator::trapezoidal});
    for (double x : t.column("v(xr1.x)")) EXPECT_EQ(x, 0.42);
}

TEST(RramDynamics, MonotoneUnderConstantBias)
{
    for (double v : {0.4, -0.4}) {
        const auto n = engine::parse_netlist(".model r rram\nV1 a 0 " + std::to_string(v) +
                                             "\nXR1 a 0 model=r x0=0.5\n");
        engine::Simulator sim(n.circuit);
        const auto x = sim.transient({1e-8, 2e-6, true, engine::Integrator::backward_euler}).column("v(xr1.x)");
        for (size_t k = 1; k < x.size(); ++k) {
            if (v > 0)
                EXPECT_GE(x[k], x[k - 1]);
            else
                EXPECT_LE(x[k], x[k - 1]);
        }
        EXPECT_NE(x.back(), x.front());
    }
}

TEST(Rram1T1R, TuningCurveIsMonotone)
{
    std::vector<double> vg;
    for (int k = 0; k <= 16; ++k) vg.push_back(0.2 + 0.05 * k);
    const auto pts = tune_1t1r(RramParams{}, spcore::ModelParams{}, vg);
    std::vector<double> levels;
    for (size_t k = 1; k < pts.size(); ++k) {
        EXPECT_GE(pts[k].x, pts[k - 1].x);
        EXPECT_GE(pts[k].i_read, pts[k - 1].i_read);
    }
    for (const auto& p : pts) levels.push_back(p.i_read);
    EXPECT_GE(distinguishable_levels(levels, 0.05), 10);
}

TEST(Rram1T1R, DistinguishableLevelCount)
{
    EXPECT_EQ(distinguishable_levels({1.0, 1.01, 1.06, 1.2, 1.21}, 0.05), 3);
    EXPECT_EQ(distinguishable_levels({}, 0.05), 0);
}
