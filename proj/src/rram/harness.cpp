#include "nvmflow/rram/harness.hpp"

#include <algorithm>
#include <cmath>

namespace nvmflow::rram {

using namespace engine;

Table hysteresis_sweep(const RramParams& p, double v_max, double period, double tstep, double x0)
{
    // Two triangles in series: positive lobe, then negative lobe.
    const double q = period / 4;
    Circuit c;
    c.set_model("dev", p);
    const NodeId a = c.node("a"), b = c.node("b");
    c.add(VoltageSource{"vpos", a, 0, {std::nullopt, Pulse{0, v_max, 0, q, q, 0, 0}}});
    c.add(VoltageSource{"vneg", b, a, {std::nullopt, Pulse{0, -v_max, 2 * q, q, q, 0, 0}}});
    c.add(RramDevice{"xr1", b, 0, "dev", x0});
    Simulator sim(std::move(c));
    const Table t = sim.transient({tstep, period, true, Integrator::trapezoidal});

    Table out;
    out.columns = {"time", "v", "i", "x"};
    const size_t kv = t.index("v(b)"), ki = t.index("i(xr1)"), kx = t.index("v(xr1.x)");
    for (const auto& r : t.rows) out.rows.push_back({r[0], r[kv], r[ki], r[kx]});
    return out;
}

std::vector<TunePoint> tune_1t1r(const RramParams& p, const spcore::ModelParams& mos,
                                 const std::vector<double>& v_pgm, const TuneSettings& s)
{
    std::vector<TunePoint> out;
    for (double vg : v_pgm) {
        Circuit c;
        c.set_model("dev", p);
        c.set_model("acc", mos);
        const NodeId top = c.node("top"), mid = c.node("mid"), gate = c.node("gate");
        c.add(VoltageSource{"vtop", top, 0, {std::nullopt, Pulse{0, s.v_pos, s.edge, s.edge, s.edge, s.width, 0}}});
        c.add(VoltageSource{"vg", gate, 0, {vg, std::nullopt}});
        c.add(RramDevice{"xr1", top, mid, "dev", s.x0});
        c.add(Mosfet{"m1", mid, gate, 0, "acc"});
        Simulator sim(std::move(c));
        sim.transient({s.width / 50, s.width + 4 * s.edge, true, Integrator::backward_euler});

        sim.set_source_dc("vtop", s.v_read);
        sim.set_source_dc("vg", s.v_gate_read);
        const auto x = sim.op();
        out.push_back({vg, sim.rram_state("xr1"), sim.current(x, "xr1")});
    }
    return out;
}

int distinguishable_levels(std::vector<double> levels, double rel_gap)
{
    if (levels.empty()) return 0;
    std::sort(levels.begin(), levels.end());
    int count = 1;
    double last = levels.front();
    for (double v : levels) {
        if (v - last > rel_gap * std::abs(last)) {
            ++count;
            last = v;
        }
    }
    return count;
}

} // namespace nvmflow::rram
