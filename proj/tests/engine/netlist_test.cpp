#include <gtest/gtest.h>

#include "nvmflow/engine/netlist.hpp"

using namespace nvmflow::engine;

TEST(Netlist, ResistorCard)
{
    const Netlist n = parse_netlist("R1 a 0 1k\n");
    ASSERT_EQ(n.circuit.elements().size(), 1u);
    const auto& r = std::get<Resistor>(n.circuit.elements()[0]);
    EXPECT_EQ(r.name, "r1");
    EXPECT_EQ(n.circuit.node_name(r.a), "a");
    EXPECT_EQ(r.b, 0);
    EXPECT_EQ(r.r, 1000.0);
}

TEST(Netlist, PulseHasSevenFields)
{
    const Netlist n = parse_netlist("V1 in 0 PULSE(0 1 1u 1n 1n 5u 10u)\nR1 in 0 1k\n");
    const auto& v = std::get<VoltageSource>(n.circuit.elements()[0]);
    ASSERT_TRUE(v.wave.pulse);
    EXPECT_FALSE(v.wave.dc);
    const Pulse expect{0, 1, 1e-6, 1e-9, 1e-9, 5e-6, 10e-6};
    EXPECT_EQ(*v.wave.pulse, expect);
}

TEST(Netlist, DcAndPulseTogether)
{
    const Netlist n = parse_netlist("V1 in 0 DC 0.5 PULSE(0 1 0 1n 1n 1u 2u)\nR1 in 0 1\n");
    const auto& v = std::get<VoltageSource>(n.circuit.elements()[0]);
    ASSERT_TRUE(v.wave.dc);
    EXPECT_EQ(*v.wave.dc, 0.5);
    EXPECT_TRUE(v.wave.pulse);
}

constexpr const char* kFull = R"(* every element kind
.model nch cmg l=30n w=1u tsi=10n
.model mem rram gon=2m kset=5e5
.model syn fg csg=0.2f betafn=1e10 vfb=0.1
V1 in 0 DC 1.2
Vp pg 0 PULSE(0 10 1u 10n 10n 100u 0)
I1 0 in DC 1u
R1 in mid 10k
C1 mid 0 1p ic=0.3
M1 mid in 0 model=nch
XR1 in mid model=mem x0=0.25
XF1 mid 0 in 0 pg model=syn qfg0=-1e-17
.op
.dc v1 0 1.2 0.1
.tran 1n 10u uic method=trap
.end
)";

TEST(Netlist, RoundTripIsIdentical)
{
    const Netlist a = parse_netlist(kFull);
    const std::string text = serialize(a);
    const Netlist b = parse_netlist(text);
    EXPECT_EQ(a.circuit, b.circuit);
    EXPECT_EQ(a.analyses, b.analyses);
    EXPECT_EQ(serialize(b), text);
}

TEST(Netlist, ParsesEveryKind)
{
    const Netlist n = parse_netlist(kFull);
    EXPECT_EQ(n.circuit.elements().size(), 8u);
    ASSERT_EQ(n.analyses.size(), 3u);
    const auto& tr = std::get<Transient>(n.analyses[2]);
    EXPECT_TRUE(tr.uic);
    EXPECT_EQ(tr.method, Integrator::trapezoidal);
    const auto& fg = std::get<nvmflow::floatgate::FloatingGateParams>(*n.circuit.find_model("syn"));
    EXPECT_EQ(fg.C_sg, 0.2e-15);
    EXPECT_EQ(fg.beta_fn, 1e10);
    EXPECT_EQ(fg.mos.V_fb, 0.1);
    const auto& xr = std::get<RramDevice>(*n.circuit.find("xr1"));
    EXPECT_EQ(xr.x0, 0.25);
}

TEST(Netlist, ContinuationAndComments)
{
    const Netlist n = parse_netlist("* title\nV1 in 0\n+ DC 2 ; trailing\nR1 in 0 1k\n");
    EXPECT_EQ(*std::get<VoltageSource>(n.circuit.elements()[0]).wave.dc, 2.0);
}

TEST(Netlist, CaseInsensitive)
{
    const Netlist n = parse_netlist("r1 A GND 1K\n.OP\n");
    const auto& r = std::get<Resistor>(n.circuit.elements()[0]);
    EXPECT_EQ(r.b, 0);
    EXPECT_EQ(n.circuit.node_name(r.a), "a");
}

TEST(Netlist, UnknownCardReportsLine)
{
    try {
        parse_netlist("R1 a 0 1k\n\nQ1 a b c\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        ASSERT_EQ(e.diagnostics().size(), 1u);
        EXPECT_EQ(e.diagnostics()[0].line, 3);
    }
}

TEST(Netlist, AllErrorsAreCollected)
{
    try {
        parse_netlist("R1 a 0 xyz\nC1 a\n.frobnicate\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        ASSERT_EQ(e.diagnostics().size(), 3u);
        EXPECT_EQ(e.diagnostics()[0].line, 1);
        EXPECT_EQ(e.diagnostics()[1].line, 2);
        EXPECT_EQ(e.diagnostics()[2].line, 3);
    }
}

TEST(Netlist, UnresolvedModelIsAnError)
{
    try {
        parse_netlist("V1 a 0 1\nM1 a a 0 model=missing\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        ASSERT_FALSE(e.diagnostics().empty());
        EXPECT_NE(std::string(e.what()).find("missing"), std::string::npos);
    }
}

TEST(Netlist, WrongModelKindIsAnError)
{
    EXPECT_THROW(parse_netlist(".model m rram\nV1 a 0 1\nM1 a a 0 model=m\n"), ParseError);
}

TEST(Netlist, DuplicateNameIsAnError)
{
    EXPECT_THROW(parse_netlist("R1 a 0 1k\nR1 a 0 2k\n"), ParseError);
}

TEST(Netlist, SweepOfUnknownSourceIsAnError)
{
    EXPECT_THROW(parse_netlist("R1 a 0 1k\n.dc v9 0 1 0.1\n"), ParseError);
}

TEST(Netlist, DanglingNodeWarns)
{
    const Netlist n = parse_netlist("V1 a 0 1\nR1 a b 1k\n");
    ASSERT_EQ(n.warnings.size(), 1u);
    EXPECT_NE(n.warnings[0].message.find("b"), std::string::npos);
}
