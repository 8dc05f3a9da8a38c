#pragma once

#include "nvmflow/engine/simulator.hpp"
#include "nvmflow/floatgate/fg_model.hpp"

namespace nvmflow::floatgate {

struct ReadBias {
    double v_d = 0.1;  // drain, V (source grounded)
    double v_sg = 1.0; // synaptic gate, V
};

/// One floating-gate device with sources on every terminal, programmed by
/// rectangular pulses on nfb or pfb and read as its drain current at a fixed bias.
/// Positive pfb pulses strengthen the cell; negative nfb pulses weaken it.
class Cell {
public:
    explicit Cell(FloatingGateParams params = {}, ReadBias bias = {}, double q_fg = 0.0);

    /// DC drain current at the read bias, A.
    double read();
    /// Applies one pulse (edges 1% of the width, at most 10 ns) with the read
    /// bias held on d and sg, then returns the change in read current.
    /// A zero width applies nothing.
    double program_pulse(Terminal terminal, double amplitude, double width);
    /// Read bias held for `duration`; columns as engine::Simulator output.
    engine::Table hold(double duration, double tstep);
    /// Sets every terminal source to a DC level (read bias uses set_read_bias).
    void set_bias(double v_d, double v_sg, double v_nfb, double v_pfb);
    void set_read_bias();

    double charge() const;
    double floating_gate_voltage();
    engine::Simulator& simulator() { return sim_; }

private:
    engine::Simulator sim_;
    ReadBias bias_;
};

} // namespace nvmflow::floatgate
