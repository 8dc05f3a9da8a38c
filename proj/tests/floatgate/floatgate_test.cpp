#include <gtest/gtest.h>

#include <cmath>

#include "nvmflow/engine/netlist.hpp"
#include "nvmflow/floatgate/harness.hpp"

using namespace nvmflow;
using namespace nvmflow::floatgate;

TEST(FnCurrent, ZeroAtZeroBias)
{
    const FloatingGateParams p;
    EXPECT_EQ(fn_current(p, 0.0), 0.0);
    EXPECT_EQ(fn_conductance(p, 0.0), 0.0);
}

TEST(FnCurrent, Odd)
{
    const FloatingGateParams p;
    for (double v : {2.0, 5.0, 10.0}) EXPECT_EQ(fn_current(p, -v), -fn_current(p, v));
}

TEST(FnCurrent, Selectivity)
{
    const FloatingGateParams p;
    EXPECT_GT(fn_current(p, 10.0), 1e6 * fn_current(p, 2.0));
}

TEST(FnCurrent, UnderflowIsExactZero)
{
    const FloatingGateParams p;
    EXPECT_EQ(fn_current(p, 1e-3), 0.0);
}

TEST(FnCurrent, ConductanceIsDerivative)
{
    const FloatingGateParams p;
    for (double v : {-9.0, -6.0, 5.0, 8.0, 12.0}) {
        const double h = 1e-6;
        const double fd = (fn_current(p, v + h) - fn_current(p, v - h)) / (2 * h);
        EXPECT_NEAR(fn_conductance(p, v), fd, 1e-6 * fd);
    }
}

TEST(FgParams, SetForwardsTransistorKeys)
{
    FloatingGateParams p;
    p.set("CSG", 0.3e-15);
    p.set("vfb", -0.2);
    EXPECT_EQ(p.C_sg, 0.3e-15);
    EXPECT_EQ(p.mos.V_fb, -0.2);
    EXPECT_THROW(p.set("bogus", 1), std::invalid_argument);
    FloatingGateParams q;
    q.C_pfb = 0;
    EXPECT_THROW(q.validate(), std::invalid_argument);
}

TEST(FgSubcircuit, Topology)
{
    const FloatingGateParams p;
    const Subcircuit sc = build_subcircuit(p);
    for (const auto& c : sc.caps) EXPECT_EQ(c.b, Terminal::fg);
    EXPECT_EQ(sc.readout.g, Terminal::fg);
    EXPECT_EQ(sc.tunnels[0].from, Terminal::nfb);
    EXPECT_EQ(sc.tunnels[1].from, Terminal::pfb);
}

TEST(FgCell, StaticCouplingIsCapacitiveDivider)
{
    // Subthreshold read so the readout channel holds negligible charge.
    Cell cell;
    cell.set_bias(0.1, 0.6, 0.3, -0.3);
    auto& sim = cell.simulator();
    const auto x = sim.op();
    EXPECT_NEAR(sim.voltage(x, "xf1.fg"), (0.6 + 0.3 - 0.3) / 3, 1e-4);
}

TEST(FgCell, StoredChargeShiftsFloatingGate)
{
    const FloatingGateParams p;
    const double q = 1e-17;
    Cell a(p, {0.1, 0.0}), b(p, {0.1, 0.0}, q);
    const double ctot = p.C_sg + p.C_nfb + p.C_pfb;
    EXPECT_NEAR(b.floating_gate_voltage() - a.floating_gate_voltage(), q / ctot, 1e-3 * q / ctot);
}

TEST(FgCell, ReadIsConstantWithoutProgramming)
{
    Cell cell;
    const double i0 = cell.read();
    const auto t = cell.hold(1e-3, 1e-5);
    for (double i : t.column("i(xf1)")) EXPECT_LT(std::abs(i - i0), 1e-6 * std::abs(i0));
}

TEST(FgCell, ChargeConservedAtReadBias)
{
    Cell cell({}, {}, 2e-16);
    const double q0 = cell.charge();
    cell.hold(1e-3, 1e-5);
    EXPECT_LT(std::abs(cell.charge() - q0), 1e-12);
    EXPECT_LT(std::abs(cell.charge() - q0), 1e-24);
}

TEST(FgCell, PulsePolarity)
{
    Cell cell;
    EXPECT_GT(cell.program_pulse(Terminal::pfb, 10.0, 100e-6), 0.0);
    EXPECT_LT(cell.program_pulse(Terminal::nfb, -10.0, 100e-6), 0.0);
}

TEST(FgCell, PolarityHoldsAcrossAmplitudes)
{
    for (double a : {8.0, 10.0, 12.0}) {
        Cell cell;
        EXPECT_GE(cell.program_pulse(Terminal::pfb, a, 20e-6), 0.0) << a;
        EXPECT_GT(cell.charge(), 0.0);
        const double q = cell.charge();
        EXPECT_LE(cell.program_pulse(Terminal::nfb, -a, 20e-6), 0.0) << a;
        EXPECT_LT(cell.charge(), q);
    }
}

TEST(FgCell, ZeroWidthChangesNothing)
{
    Cell cell;
    const double q = cell.charge();
    EXPECT_EQ(cell.program_pulse(Terminal::pfb, 10.0, 0.0), 0.0);
    EXPECT_EQ(cell.charge(), q);
}

TEST(FgCell, RepeatedPulsesSaturate)
{
    Cell cell;
    double prev = INFINITY;
    for (int k = 0; k < 5; ++k) {
        const double d = cell.program_pulse(Terminal::pfb, 10.0, 100e-6);
        EXPECT_GT(d, 0.0) << k;
        EXPECT_LT(d, prev) << k;
        prev = d;
    }
}

TEST(FgCell, RoundTripReturnsTowardStart)
{
    Cell cell;
    const double i0 = cell.read();
    const double up = cell.program_pulse(Terminal::pfb, 10.0, 100e-6);
    cell.program_pulse(Terminal::nfb, -10.0, 100e-6);
    EXPECT_LT(std::abs(cell.read() - i0), 0.2 * std::abs(up));
}

TEST(FgCell, ReadDisturbIsNegligible)
{
    Cell cell;
    const double q0 = cell.charge();
    cell.program_pulse(Terminal::pfb, 10.0, 100e-6);
    const double pulse_transfer = std::abs(cell.charge() - q0);
    ASSERT_GT(pulse_transfer, 0.0);

    const double q1 = cell.charge();
    cell.set_bias(1.5, 1.5, 1.5, 1.5);
    cell.simulator().transient({1e-5, 1e-3, false, engine::Integrator::trapezoidal});
    cell.set_bias(1.5, 1.5, 0.0, 1.5);
    cell.simulator().transient({1e-5, 1e-3, false, engine::Integrator::trapezoidal});
    EXPECT_LT(std::abs(cell.charge() - q1), 1e-6 * pulse_transfer);
}

TEST(FgEngine, NetlistInstance)
{
    const auto n = engine::parse_netlist(".model f fg\nVd d 0 0.1\nVsg sg 0 1\nVn nfb 0 0\nVp pfb 0 0\n"
                                         "XF1 d 0 sg nfb pfb model=f qfg0=1e-16\n");
    engine::Simulator sim(n.circuit);
    EXPECT_EQ(sim.fg_charge("xf1"), 1e-16);
    Cell cell({}, {0.1, 1.0}, 1e-16);
    EXPECT_NEAR(sim.current(sim.op(), "xf1"), cell.read(), 1e-9 * cell.read());
}
