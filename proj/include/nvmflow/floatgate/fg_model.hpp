#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nvmflow/spcore/model_params.hpp"

namespace nvmflow::floatgate {

/// Floating-gate synaptic transistor: synaptic gate (sg) and two programming
/// terminals (nfb, pfb) couple capacitively onto an isolated gate that drives
/// a core-model readout transistor. Programming is by Fowler-Nordheim tunneling
/// between each programming terminal and the floating gate.
struct FloatingGateParams {
    double C_sg = 0.1e-15;  // F
    double C_nfb = 0.1e-15;
    double C_pfb = 0.1e-15;
    double t_tun = 8e-9;    // m
    double A_tun = 1e-15;   // m^2
    double alpha_fn = 1e-6; // A/V^2
    double beta_fn = 1.5e10; // V/m
    spcore::ModelParams mos;

    bool operator==(const FloatingGateParams&) const = default;

    void validate() const;
    /// Keys: csg cnfb cpfb ttun atun alphafn betafn; anything else is passed
    /// on to the readout transistor's parameter set.
    void set(std::string_view key, double value);
};

std::vector<std::pair<std::string, double>> to_pairs(const FloatingGateParams& p);

/// Tunnel current from the programming terminal into the floating gate for a
/// terminal-to-gate voltage v. Odd in v, exactly 0 when the exponent underflows.
double fn_current(const FloatingGateParams& p, double v);
/// d fn_current / dv (even, non-negative).
double fn_conductance(const FloatingGateParams& p, double v);

/// Terminals of the expanded device; fg is the internal floating node.
enum class Terminal { d, s, sg, nfb, pfb, fg };

/// Primitive elements the circuit engine stamps for one floating-gate device.
struct Subcircuit {
    struct Cap {
        Terminal a, b;
        double c;
    };
    struct Transistor {
        Terminal d, g, s;
    };
    struct Tunnel { // fn_current from `from` into the floating gate
        Terminal from, to;
    };
    std::array<Cap, 3> caps;
    Transistor readout;
    std::array<Tunnel, 2> tunnels;
};

Subcircuit build_subcircuit(const FloatingGateParams& p);

} // namespace nvmflow::floatgate
