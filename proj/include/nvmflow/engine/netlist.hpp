#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nvmflow/engine/circuit.hpp"

namespace nvmflow::engine {

struct Diagnostic {
    int line = 0;
    std::string message;
};

/// Every error found in a netlist, in line order. No partial circuit is returned.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

struct Netlist {
    Circuit circuit;
    std::vector<Analysis> analyses;
    std::vector<Diagnostic> warnings; // e.g. nodes referenced only once
};

/// Line-oriented SPICE subset:
///   * comment                       R<id> n1 n2 <val>
///   C<id> n1 n2 <val> [ic=<v>]      V<id> n+ n- [DC <val>] [PULSE(v1 v2 td tr tf pw per)]
///   I<id> n+ n- [DC] <val>          M<id> d g s model=<name>
///   XR<id> n+ n- model=<name> [x0=<val>]
///   XF<id> d s sg nfb pfb model=<name> [qfg0=<val>]
///   .model <name> <cmg|rram|fg> key=val ...
///   .op   .dc <src> <start> <stop> <step>   .tran <tstep> <tstop> [uic] [method=be|trap]   .end
/// Keywords and names are case-insensitive; '+' continues the previous line.
Netlist parse_netlist(std::string_view text);
Netlist load_netlist(const std::string& path);

/// Canonical text; parse_netlist(serialize(n)) reproduces n.circuit and n.analyses.
std::string serialize(const Netlist& n);

} // namespace nvmflow::engine
