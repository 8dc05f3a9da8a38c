#include "nvmflow/floatgate/harness.hpp"

#include <algorithm>
#include <stdexcept>

namespace nvmflow::floatgate {

using namespace engine;

namespace {

Circuit cell_circuit(const FloatingGateParams& p, const ReadBias& b, double q_fg)
{
    Circuit c;
    c.set_model("fg", p);
    const NodeId d = c.node("d"), sg = c.node("sg"), nfb = c.node("nfb"), pfb = c.node("pfb");
    c.add(VoltageSource{"vd", d, 0, {b.v_d, std::nullopt}});
    c.add(VoltageSource{"vsg", sg, 0, {b.v_sg, std::nullopt}});
    c.add(VoltageSource{"vnfb", nfb, 0, {0.0, std::nullopt}});
    c.add(VoltageSource{"vpfb", pfb, 0, {0.0, std::nullopt}});
    c.add(FloatingGateDevice{"xf1", d, 0, sg, nfb, pfb, "fg", q_fg});
    return c;
}

} // namespace

Cell::Cell(FloatingGateParams params, ReadBias bias, double q_fg)
    : sim_(cell_circuit(params, bias, q_fg)), bias_(bias)
{
}

void Cell::set_bias(double v_d, double v_sg, double v_nfb, double v_pfb)
{
    sim_.set_source_dc("vd", v_d);
    sim_.set_source_dc("vsg", v_sg);
    sim_.set_source_dc("vnfb", v_nfb);
    sim_.set_source_dc("vpfb", v_pfb);
}

void Cell::set_read_bias() { set_bias(bias_.v_d, bias_.v_sg, 0.0, 0.0); }

double Cell::read()
{
    set_read_bias();
    return sim_.current(sim_.op(), "xf1");
}

double Cell::floating_gate_voltage()
{
    set_read_bias();
    return sim_.voltage(sim_.op(), "xf1.fg");
}

double Cell::charge() const { return sim_.fg_charge("xf1"); }

double Cell::program_pulse(Terminal terminal, double amplitude, double width)
{
    if (terminal != Terminal::nfb && terminal != Terminal::pfb)
        throw std::invalid_argument("program_pulse: terminal must be nfb or pfb");
    if (width < 0) throw std::invalid_argument("program_pulse: width must be >= 0");
    const double before = read();
    if (width == 0) return 0.0;

    const double edge = std::min(10e-9, width / 100);
    const char* src = terminal == Terminal::pfb ? "vpfb" : "vnfb";
    sim_.set_source(src, SourceWave{std::nullopt, Pulse{0, amplitude, 0, edge, edge, width, 0}});
    sim_.transient({width / 50, width + 2 * edge, false, Integrator::trapezoidal});
    return read() - before;
}

Table Cell::hold(double duration, double tstep)
{
    set_read_bias();
    return sim_.transient({tstep, duration, false, Integrator::trapezoidal});
}

} // namespace nvmflow::floatgate
