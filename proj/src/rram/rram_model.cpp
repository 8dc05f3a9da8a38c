#include "nvmflow/rram/rram_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nvmflow/util/text.hpp"

namespace nvmflow::rram {

namespace {

void require(bool ok, const char* what)
{
    if (!ok) throw std::invalid_argument(std::string("invalid rram parameter: ") + what);
}

double window(double base, double p)
{
    return base > 0.0 ? std::pow(base, p) : 0.0;
}

double window_slope(double base, double p)
{
    return base > 0.0 ? p * std::pow(base, p - 1.0) : 0.0;
}

} // namespace

void RramParams::validate() const
{
    require(G_off > 0 && G_on > G_off && std::isfinite(G_on), "GON > GOFF > 0");
    require(V0 > 0 && Vc_set > 0 && Vc_reset > 0, "V0, VCSET, VCRESET > 0");
    require(k_set >= 0 && k_reset >= 0, "KSET, KRESET >= 0");
    require(p >= 1.0, "P >= 1");
    require(X_init >= 0.0 && X_init <= 1.0, "XINIT in [0, 1]");
}

void RramParams::set(std::string_view key, double value)
{
    const std::string k = util::to_lower(key);
    if (k == "gon") G_on = value;
    else if (k == "goff") G_off = value;
    else if (k == "v0") V0 = value;
    else if (k == "kset") k_set = value;
    else if (k == "kreset") k_reset = value;
    else if (k == "vcset") Vc_set = value;
    else if (k == "vcreset") Vc_reset = value;
    else if (k == "p") p = value;
    else if (k == "xinit") X_init = value;
    else throw std::invalid_argument("unknown rram parameter '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, double>> to_pairs(const RramParams& p)
{
    return {{"gon", p.G_on},       {"goff", p.G_off},      {"v0", p.V0},
            {"kset", p.k_set},     {"kreset", p.k_reset},  {"vcset", p.Vc_set},
            {"vcreset", p.Vc_reset}, {"p", p.p},           {"xinit", p.X_init}};
}

double conductance(const RramParams& p, double x)
{
    x = std::clamp(x, 0.0, 1.0);
    return p.G_off * std::pow(p.G_on / p.G_off, x);
}

double state_for_conductance(const RramParams& p, double g)
{
    return std::clamp(std::log(g / p.G_off) / std::log(p.G_on / p.G_off), 0.0, 1.0);
}

double rram_current(const RramParams& p, double v, double x)
{
    return conductance(p, x) * p.V0 * std::sinh(v / p.V0);
}

double state_rate(const RramParams& p, double v, double x)
{
    if (v >= 0.0) return p.k_set * std::sinh(v / p.Vc_set) * window(1.0 - x, p.p);
    return p.k_reset * std::sinh(v / p.Vc_reset) * window(x, p.p);
}

RramEval evaluate(const RramParams& p, double v, double x)
{
    RramEval e;
    const double g = conductance(p, x);
    e.I = g * p.V0 * std::sinh(v / p.V0);
    e.dI_dV = g * std::cosh(v / p.V0);
    e.dI_dX = (x >= 0.0 && x <= 1.0) ? e.I * std::log(p.G_on / p.G_off) : 0.0;
    if (v >= 0.0) {
        const double s = p.k_set * std::sinh(v / p.Vc_set);
        e.rate = s * window(1.0 - x, p.p);
        e.drate_dV = p.k_set * std::cosh(v / p.Vc_set) / p.Vc_set * window(1.0 - x, p.p);
        e.drate_dX = -s * window_slope(1.0 - x, p.p);
    } else {
        const double s = p.k_reset * std::sinh(v / p.Vc_reset);
        e.rate = s * window(x, p.p);
        e.drate_dV = p.k_reset * std::cosh(v / p.Vc_reset) / p.Vc_reset * window(x, p.p);
        e.drate_dX = s * window_slope(x, p.p);
    }
    return e;
}

} // namespace nvmflow::rram
