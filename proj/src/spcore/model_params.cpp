#include "nvmflow/spcore/model_params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nvmflow/util/text.hpp"

namespace nvmflow::spcore {

namespace {

void require(bool ok, const char* what)
{
    if (!ok) throw std::invalid_argument(std::string("invalid model parameter: ") + what);
}

} // namespace

void ModelParams::validate() const
{
    require(L > 0 && std::isfinite(L), "L > 0");
    require(W > 0 && std::isfinite(W), "W > 0");
    require(T_si > 0 && std::isfinite(T_si), "TSI > 0");
    require(EOT > 0 && std::isfinite(EOT), "EOT > 0");
    require(T > 0 && std::isfinite(T), "T > 0");
    require(n_i > 0 && std::isfinite(n_i), "NI > 0");
    require(mu0 > 0 && std::isfinite(mu0), "MU0 > 0");
    require(N_A >= n_i && std::isfinite(N_A), "NA >= NI");
    require(eps_si > 0 && eps_ox > 0, "permittivities > 0");
    require(std::isfinite(V_fb), "VFB finite");
    if (mobility_degradation) require(E_mob > 0, "EMOB > 0");
    if (velocity_saturation) require(v_sat > 0, "VSAT > 0");
}

void ModelParams::set(std::string_view key, double value)
{
    const std::string k = util::to_lower(key);
    if (k == "l") L = value;
    else if (k == "w") W = value;
    else if (k == "tsi") T_si = value;
    else if (k == "eot") EOT = value;
    else if (k == "na") N_A = value;
    else if (k == "ni") n_i = value;
    else if (k == "mu0") mu0 = value;
    else if (k == "vfb") V_fb = value;
    else if (k == "t") T = value;
    else if (k == "epssi") eps_si = value;
    else if (k == "epsox") eps_ox = value;
    else if (k == "mobmod") mobility_degradation = value != 0.0;
    else if (k == "emob") E_mob = value;
    else if (k == "vsatmod") velocity_saturation = value != 0.0;
    else if (k == "vsat") v_sat = value;
    else throw std::invalid_argument("unknown model parameter '" + std::string(key) + "'");
}

DerivedConstants derive(const ModelParams& p)
{
    DerivedConstants d{};
    d.V_t = physics::k_boltzmann * p.T / physics::q;
    d.C_ox = p.eps_ox / p.EOT;
    d.C_si = p.eps_si / p.T_si;
    d.Q_B = physics::q * p.N_A * p.T_si / 2.0;
    d.phi_B = d.V_t * std::log(p.N_A / p.n_i);
    d.Q_c = d.Q_B + 5.0 * d.V_t * d.C_si;
    // Q_ref^2 = q (n_i^2/N_A) T_si Q_c, kept in log form.
    d.ln_qref2 = std::log(physics::q) + 2.0 * std::log(p.n_i) - std::log(p.N_A) + std::log(p.T_si) +
                 std::log(d.Q_c);
    return d;
}

ModelParams parse_params(std::string_view text, ModelParams base)
{
    for (const auto& kv : util::parse_key_value_lines(text)) {
        auto v = util::parse_number(kv.value);
        if (!v) throw std::invalid_argument("line " + std::to_string(kv.line) + ": bad number '" + kv.value + "'");
        base.set(kv.key, *v);
    }
    base.validate();
    return base;
}

ModelParams load_params_file(const std::string& path, ModelParams base)
{
    return parse_params(util::read_file(path), base);
}

std::vector<std::pair<std::string, double>> to_pairs(const ModelParams& p)
{
    return {{"l", p.L},
            {"w", p.W},
            {"tsi", p.T_si},
            {"eot", p.EOT},
            {"na", p.N_A},
            {"ni", p.n_i},
            {"mu0", p.mu0},
            {"vfb", p.V_fb},
            {"t", p.T},
            {"epssi", p.eps_si},
            {"epsox", p.eps_ox},
            {"mobmod", p.mobility_degradation ? 1.0 : 0.0},
            {"emob", p.E_mob},
            {"vsatmod", p.velocity_saturation ? 1.0 : 0.0},
            {"vsat", p.v_sat}};
}

std::string to_text(const ModelParams& p)
{
    std::ostringstream os;
    os << "# core model parameters (SI)\n";
    for (const auto& [k, v] : to_pairs(p)) os << k << "=" << util::format_double(v) << "\n";
    return os.str();
}

} // namespace nvmflow::spcore
