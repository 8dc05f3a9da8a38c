#include "nvmflow/floatgate/fg_model.hpp"

#include <cmath>
#include <stdexcept>

#include "nvmflow/util/text.hpp"

namespace nvmflow::floatgate {

void FloatingGateParams::validate() const
{
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("invalid floating-gate parameter: ") + what);
    };
    require(C_sg > 0 && C_nfb > 0 && C_pfb > 0, "coupling capacitances > 0");
    require(t_tun > 0 && A_tun > 0, "TTUN, ATUN > 0");
    require(alpha_fn > 0 && beta_fn > 0, "ALPHAFN, BETAFN > 0");
    mos.validate();
}

void FloatingGateParams::set(std::string_view key, double value)
{
    const std::string k = util::to_lower(key);
    if (k == "csg") C_sg = value;
    else if (k == "cnfb") C_nfb = value;
    else if (k == "cpfb") C_pfb = value;
    else if (k == "ttun") t_tun = value;
    else if (k == "atun") A_tun = value;
    else if (k == "alphafn") alpha_fn = value;
    else if (k == "betafn") beta_fn = value;
    else mos.set(k, value);
}

std::vector<std::pair<std::string, double>> to_pairs(const FloatingGateParams& p)
{
    std::vector<std::pair<std::string, double>> out{{"csg", p.C_sg},   {"cnfb", p.C_nfb},
                                                    {"cpfb", p.C_pfb}, {"ttun", p.t_tun},
                                                    {"atun", p.A_tun}, {"alphafn", p.alpha_fn},
                                                    {"betafn", p.beta_fn}};
    for (auto& kv : spcore::to_pairs(p.mos)) out.push_back(kv);
    return out;
}

double fn_current(const FloatingGateParams& p, double v)
{
    const double e = std::abs(v) / p.t_tun;
    if (e == 0.0) return 0.0;
    const double mag = p.A_tun * p.alpha_fn * e * e * std::exp(-p.beta_fn / e);
    return v > 0 ? mag : -mag;
}

double fn_conductance(const FloatingGateParams& p, double v)
{
    const double e = std::abs(v) / p.t_tun;
    if (e == 0.0) return 0.0;
    return p.A_tun * p.alpha_fn * (2.0 * e + p.beta_fn) * std::exp(-p.beta_fn / e) / p.t_tun;
}

Subcircuit build_subcircuit(const FloatingGateParams& p)
{
    Subcircuit sc;
    sc.caps = {{{Terminal::sg, Terminal::fg, p.C_sg}, {Terminal::nfb, Terminal::fg, p.C_nfb}, {Terminal::pfb, Terminal::fg, p.C_pfb}}};
    sc.readout = {Terminal::d, Terminal::fg, Terminal::s};
    sc.tunnels = {{{Terminal::nfb, Terminal::fg}, {Terminal::pfb, Terminal::fg}}};
    return sc;
}

} // namespace nvmflow::floatgate
