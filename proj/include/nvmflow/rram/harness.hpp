#pragma once

#include <vector>

#include "nvmflow/engine/simulator.hpp"
#include "nvmflow/rram/rram_model.hpp"
#include "nvmflow/spcore/model_params.hpp"

namespace nvmflow::rram {

/// Triangular drive 0 -> +v_max -> -v_max -> 0 over one period across a single
/// device starting from x0. Columns: time, v, i, x.
engine::Table hysteresis_sweep(const RramParams& p, double v_max, double period, double tstep, double x0 = 0.0);

struct TuneSettings {
    double v_pos = 1.0;   // SET voltage on the top electrode
    double width = 1e-6;  // SET pulse width, s
    double edge = 1e-9;   // rise/fall time, s
    double v_read = 0.1;
    double v_gate_read = 1.0;
    double x0 = 0.0;
};

struct TunePoint {
    double v_pgm = 0;
    double x = 0;      // filament state after the SET pulse
    double i_read = 0; // read current through the cell, A
};

/// One-transistor-one-RRAM cell: top electrode -> RRAM -> access transistor to
/// ground. For each gate voltage a fresh cell at x0 receives one SET pulse with
/// the gate at v_pgm (the transistor limits the current), then is read.
std::vector<TunePoint> tune_1t1r(const RramParams& p, const spcore::ModelParams& mos,
                                 const std::vector<double>& v_pgm, const TuneSettings& s = {});

/// Number of read levels separated by at least `rel_gap` relative to the lower level.
int distinguishable_levels(std::vector<double> levels, double rel_gap);

} // namespace nvmflow::rram
